//! `diffw` — command-line front end.
//!
//! Subcommands wrap the library operations one to one; inputs and outputs
//! are the JSON wire formats of the core crate (series, diffeomorphisms,
//! fields) plus CSV tables for scans and trajectories. Identical inputs and
//! flags produce byte-identical outputs.
//!
//! Exit codes: 0 success, 1 usage or input errors, 2 domain errors (chart
//! overflow, antipodal pairs, pole hits).

mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use diffw_core::diffeo::{compose, invert, mu, Resolution};
use diffw_core::flow::{
    ball_certificate, bracket, evol, exp, integrate_flow, lipschitz_probe, FlowTrajectory,
};
use diffw_core::laurent::angle_grid;
use diffw_core::obstruction::{divergence_scan, obstruction_report, PoleObstruction};
use diffw_core::silva::{compactness_ratio, measured_compactness_ratio};
use diffw_core::{AnnulusLevel, CircleDiffeo, Error, RealCircleFunction, TimeDependentField};

use output::{csv, emit, fmt_f64, read_json, to_json_string};

#[derive(Parser)]
#[command(
    name = "diffw",
    version,
    about = "Spectral computations in the group of real-analytic circle diffeomorphisms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpectralOpts {
    /// Truncation degree of spectral refits
    #[arg(long, default_value_t = 64)]
    degree: usize,
    /// Circle samples per refit; 0 picks 4 * (2 * degree + 1)
    #[arg(long, default_value_t = 0)]
    grid: usize,
}

impl SpectralOpts {
    fn resolution(&self) -> Result<Resolution, CliError> {
        let res = if self.grid == 0 {
            Resolution::for_degree(self.degree)
        } else {
            Resolution {
                degree: self.degree,
                samples: self.grid,
            }
        };
        res.validate()?;
        Ok(res)
    }
}

fn parse_step(raw: &str) -> Result<f64, String> {
    let step: f64 = raw.parse().map_err(|e| format!("{e}"))?;
    if step > 0.0 && step <= 0.1 {
        Ok(step)
    } else {
        Err(format!("step {step} outside (0, 0.1]"))
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Dump {
    /// Angle values on the sampling grid
    Grid,
    /// Laurent coefficients, real and imaginary parts
    Coeffs,
}

#[derive(Subcommand)]
enum Command {
    /// Compose two diffeomorphisms: a o b
    Compose {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        spectral: SpectralOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invert a diffeomorphism (Newton on the lift)
    Invert {
        a: PathBuf,
        #[command(flatten)]
        spectral: SpectralOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The chart composition map mu(eta1, eta2) = eta1 o E(eta2)
    Mu {
        eta1: PathBuf,
        eta2: PathBuf,
        #[command(flatten)]
        spectral: SpectralOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the flow of a time-dependent field; emits a trajectory CSV
    Flow {
        field: PathBuf,
        #[arg(long, default_value = "1e-3", value_parser = parse_step)]
        step: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, value_enum, default_value_t = Dump::Grid)]
        dump: Dump,
        #[command(flatten)]
        spectral: SpectralOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolution map: the time-1 flow of a field
    Evol {
        field: PathBuf,
        #[arg(long, default_value = "1e-3", value_parser = parse_step)]
        step: f64,
        #[command(flatten)]
        spectral: SpectralOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lie-group exponential: time-1 flow of an autonomous field
    Exp {
        field: PathBuf,
        #[arg(long, default_value = "1e-3", value_parser = parse_step)]
        step: f64,
        #[command(flatten)]
        spectral: SpectralOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lie bracket of two vector fields
    Bracket {
        x: PathBuf,
        y: PathBuf,
        #[command(flatten)]
        spectral: SpectralOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ball certificate of a field at a level
    Certify {
        field: PathBuf,
        #[arg(long, default_value_t = 2)]
        level: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical Lipschitz constant of evol around a center field
    Lipschitz {
        center: PathBuf,
        /// Perturbed fields (repeatable)
        #[arg(long = "perturb", required = true)]
        perturbations: Vec<PathBuf>,
        #[arg(long, default_value = "1e-3", value_parser = parse_step)]
        step: f64,
        #[command(flatten)]
        spectral: SpectralOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bonding-map norm decay table: closed form vs grid measurement
    SilvaDiag {
        #[arg(long, default_value_t = 32)]
        k_max: i64,
        #[arg(long, default_value_t = 8)]
        n_max: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Non-analyticity evidence: symmetry checks, slice identity,
    /// divergence fit and radius estimates (JSON report or scan CSV)
    Obstruction {
        #[arg(long = "R", default_value_t = 1.0)]
        pole_exponent: f64,
        /// Scale of the pole germ; defaults to the 1/(4n)-ball normalization
        #[arg(long = "r")]
        scale: Option<f64>,
        #[arg(long, default_value_t = 2)]
        level: u32,
        #[arg(long, value_delimiter = ',')]
        sweep_r: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        sweep_n: Vec<u32>,
        /// Scan times for the divergence table (comma separated)
        #[arg(long, value_delimiter = ',')]
        t_grid: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        spectral: SpectralOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Io(std::io::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(
                Error::EvalAtZero
                | Error::AntipodalPair
                | Error::LogBranchCut
                | Error::ChartOverflow { .. }
                | Error::NotADiffeomorphism { .. }
                | Error::IllConditioned { .. }
                | Error::NumericalFailure { .. }
                | Error::NotRealOnCircle { .. }
                | Error::PoleHit
                | Error::OutOfDisc { .. }
                | Error::LevelMeetsPole { .. },
            ) => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Compose {
            a,
            b,
            spectral,
            out,
        } => {
            let res = spectral.resolution()?;
            let a: CircleDiffeo = read_json(&a)?;
            let b: CircleDiffeo = read_json(&b)?;
            let composed = compose(&a, &b, &res)?;
            emit(&out, &to_json_string(&composed)?)?;
        }
        Command::Invert { a, spectral, out } => {
            let res = spectral.resolution()?;
            let a: CircleDiffeo = read_json(&a)?;
            let inverse = invert(&a, &res)?;
            emit(&out, &to_json_string(&inverse)?)?;
        }
        Command::Mu {
            eta1,
            eta2,
            spectral,
            out,
        } => {
            let res = spectral.resolution()?;
            let eta1: RealCircleFunction = read_json(&eta1)?;
            let eta2: RealCircleFunction = read_json(&eta2)?;
            let composed = mu(&eta1, &eta2, &res)?;
            emit(&out, &to_json_string(&composed)?)?;
        }
        Command::Flow {
            field,
            step,
            t_end,
            dump,
            spectral,
            out,
        } => {
            let res = spectral.resolution()?;
            let field: TimeDependentField = read_json(&field)?;
            if !field.c1_in_time() {
                eprintln!(
                    "warning: piecewise-linear field is only C^0 in time; \
                     the C^1 evolution theory does not apply verbatim"
                );
            }
            let traj = integrate_flow(&field, step, t_end, &res)?;
            emit(&out, &trajectory_csv(&traj, dump, &res))?;
        }
        Command::Evol {
            field,
            step,
            spectral,
            out,
        } => {
            let res = spectral.resolution()?;
            let field: TimeDependentField = read_json(&field)?;
            let endpoint = evol(&field, step, &res)?;
            emit(&out, &to_json_string(&endpoint)?)?;
        }
        Command::Exp {
            field,
            step,
            spectral,
            out,
        } => {
            let res = spectral.resolution()?;
            let x: RealCircleFunction = read_json(&field)?;
            let diffeo = exp(&x, step, &res)?;
            emit(&out, &to_json_string(&diffeo)?)?;
        }
        Command::Bracket {
            x,
            y,
            spectral,
            out,
        } => {
            let res = spectral.resolution()?;
            let x: RealCircleFunction = read_json(&x)?;
            let y: RealCircleFunction = read_json(&y)?;
            let result = bracket(&x, &y, &res);
            if result.truncation_tail > 0.0 {
                eprintln!(
                    "note: truncation to degree {} discarded coefficient mass {}",
                    res.degree,
                    fmt_f64(result.truncation_tail)
                );
            }
            emit(&out, &to_json_string(&result.field)?)?;
        }
        Command::Certify { field, level, out } => {
            let field: TimeDependentField = read_json(&field)?;
            let certificate = ball_certificate(&field, level)?;
            emit(&out, &to_json_string(&certificate)?)?;
        }
        Command::Lipschitz {
            center,
            perturbations,
            step,
            spectral,
            out,
        } => {
            let res = spectral.resolution()?;
            let center: TimeDependentField = read_json(&center)?;
            let perturbed: Vec<TimeDependentField> = perturbations
                .iter()
                .map(|p| read_json(p))
                .collect::<Result<_, _>>()?;
            let ratio = lipschitz_probe(&center, &perturbed, step, &res)?;
            #[derive(Serialize)]
            struct Probe {
                ratio: f64,
                perturbations: usize,
            }
            emit(
                &out,
                &to_json_string(&Probe {
                    ratio,
                    perturbations: perturbed.len(),
                })?,
            )?;
        }
        Command::SilvaDiag { k_max, n_max, out } => {
            if k_max < 0 || n_max == 0 {
                return Err(CliError::Usage(
                    "silva-diag needs k-max >= 0 and n-max >= 1".into(),
                ));
            }
            let mut rows = Vec::new();
            for n in 1..=n_max {
                for k in 0..=k_max {
                    let closed = compactness_ratio(k, n);
                    let measured = measured_compactness_ratio(k, n)?;
                    rows.push(vec![
                        k.to_string(),
                        n.to_string(),
                        fmt_f64(closed),
                        fmt_f64(measured),
                    ]);
                }
            }
            emit(
                &out,
                &csv(&["k", "n", "closed_form_ratio", "measured_ratio"], &rows),
            )?;
        }
        Command::Obstruction {
            pole_exponent,
            scale,
            level,
            sweep_r,
            sweep_n,
            t_grid,
            format,
            spectral,
            out,
        } => {
            let level = AnnulusLevel::new(level)?;
            let obs = match scale {
                Some(r) => PoleObstruction::with_scale(pole_exponent, r, level)?,
                None => PoleObstruction::normalized(pole_exponent, level)?,
            };
            match format {
                Format::Json => {
                    let report = obstruction_report(&obs, spectral.degree, &sweep_r, &sweep_n)?;
                    emit(&out, &to_json_string(&report)?)?;
                }
                Format::Csv => {
                    let grid = if t_grid.is_empty() {
                        diffw_core::obstruction::default_scan_grid(pole_exponent, 31)
                    } else {
                        t_grid
                    };
                    let scan = divergence_scan(&obs, &grid)?;
                    let rows: Vec<Vec<String>> = scan
                        .iter()
                        .map(|(t, v)| vec![fmt_f64(*t), fmt_f64(*v)])
                        .collect();
                    emit(&out, &csv(&["t", "abs_value"], &rows))?;
                }
            }
        }
    }
    Ok(())
}

fn trajectory_csv(traj: &FlowTrajectory, dump: Dump, res: &Resolution) -> String {
    match dump {
        Dump::Grid => {
            let header: Vec<String> = std::iter::once("t".to_string())
                .chain((0..res.samples).map(|m| format!("eta_{m}")))
                .collect();
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let thetas = angle_grid(res.samples);
            let rows: Vec<Vec<String>> = traj
                .times
                .iter()
                .zip(&traj.states)
                .map(|(t, state)| {
                    std::iter::once(fmt_f64(*t))
                        .chain(thetas.iter().map(|&th| fmt_f64(state.eta().eval_theta(th))))
                        .collect()
                })
                .collect();
            csv(&header_refs, &rows)
        }
        Dump::Coeffs => {
            let degree = res.degree as i64;
            let header: Vec<String> = std::iter::once("t".to_string())
                .chain((-degree..=degree).flat_map(|k| [format!("re_{k}"), format!("im_{k}")]))
                .collect();
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = traj
                .times
                .iter()
                .zip(&traj.states)
                .map(|(t, state)| {
                    let mut row = vec![fmt_f64(*t)];
                    for k in -degree..=degree {
                        let c = state.eta().series().coeff(k);
                        row.push(fmt_f64(c.re));
                        row.push(fmt_f64(c.im));
                    }
                    row
                })
                .collect();
            csv(&header_refs, &rows)
        }
    }
}
