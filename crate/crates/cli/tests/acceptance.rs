//! End-to-end checks of the binary: determinism of the obstruction report
//! (byte-identical output across runs), the documented exit codes, and JSON
//! round trips through the 17-significant-digit writer.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diffw"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

const ZERO_SERIES: &str = r#"{"degree": 0, "coeffs": [[0.0, 0.0]]}"#;

fn rotation_diffeo(angle: f64) -> String {
    format!(r#"{{"eta": {{"degree": 0, "coeffs": [[{angle}, 0.0]]}}, "orientation_margin": 1.0}}"#)
}

fn constant_field(value: f64, level: u32) -> String {
    format!(
        r#"{{"interpolation": "piecewise-linear", "level": {level}, "knots": [
            {{"t": 0.0, "field": {{"degree": 0, "coeffs": [[{value}, 0.0]]}}}},
            {{"t": 1.0, "field": {{"degree": 0, "coeffs": [[{value}, 0.0]]}}}}]}}"#
    )
}

#[test]
fn criterion_10_obstruction_report_is_deterministic() {
    let started = Instant::now();
    let out_a = tmp("report_a.json");
    let out_b = tmp("report_b.json");
    let args = |out: &Path| {
        vec![
            "obstruction".to_string(),
            "--R".into(),
            "1.0".into(),
            "--sweep-r".into(),
            "1e-1,1e-3,1e-5".into(),
            "--sweep-n".into(),
            "2,4,8".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let first = bin().args(args(&out_a)).output().unwrap();
    let second = bin().args(args(&out_b)).output().unwrap();
    assert!(first.status.success() && second.status.success());
    let bytes_a = std::fs::read(&out_a).unwrap();
    let bytes_b = std::fs::read(&out_b).unwrap();
    let identical = bytes_a == bytes_b;
    println!(
        "criterion 10 (CLI determinism): {} — two obstruction runs, {} bytes each ({:.2} s)",
        if identical { "PASS" } else { "FAIL" },
        bytes_a.len(),
        started.elapsed().as_secs_f64()
    );
    assert!(identical);

    // The report itself must carry the expected radius rows.
    let report: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
    assert_eq!(report["verdict"], "pass");
    let rows = report["radius_estimates"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    for row in rows {
        let estimate = row["estimate"].as_f64().unwrap();
        assert!((estimate - 1.0).abs() <= 0.05, "estimate {estimate}");
    }
}

#[test]
fn exp_of_zero_field_is_identity() {
    let input = tmp("zero_series.json");
    write(&input, ZERO_SERIES);
    let out = run(&["exp", input.to_str().unwrap()]);
    assert!(out.status.success());
    let diffeo: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for pair in diffeo["eta"]["coeffs"].as_array().unwrap() {
        assert!(pair[0].as_f64().unwrap().abs() < 1e-12);
        assert!(pair[1].as_f64().unwrap().abs() < 1e-12);
    }
    assert!((diffeo["orientation_margin"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn silva_diag_matches_closed_form() {
    let out = run(&["silva-diag", "--k-max", "32", "--n-max", "8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,n,closed_form_ratio,measured_ratio"
    );
    let mut checked = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let k: i64 = cells[0].parse().unwrap();
        let n: f64 = cells[1].parse().unwrap();
        let closed: f64 = cells[2].parse().unwrap();
        let measured: f64 = cells[3].parse().unwrap();
        let expect = (-(k as f64) / (n * (n + 1.0))).exp();
        assert!((closed - expect).abs() < 1e-15);
        assert!((measured - closed).abs() < 1e-10);
        checked += 1;
    }
    assert_eq!(checked, 33 * 8);
}

#[test]
fn compose_round_trips_and_adds_rotations() {
    let a = tmp("rot_a.json");
    let b = tmp("rot_b.json");
    write(&a, &rotation_diffeo(0.25));
    write(&b, &rotation_diffeo(0.5));
    let composed = tmp("rot_ab.json");
    let out = run(&[
        "compose",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--out",
        composed.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // The artifact reads back and the constant mode is the angle sum.
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&composed).unwrap()).unwrap();
    let degree = value["eta"]["degree"].as_u64().unwrap() as usize;
    let c0 = &value["eta"]["coeffs"][degree];
    assert!((c0[0].as_f64().unwrap() - 0.75).abs() < 1e-12);

    // Re-inverting through the CLI consumes the artifact it produced.
    let inverted = tmp("rot_ab_inv.json");
    let out = run(&[
        "invert",
        composed.to_str().unwrap(),
        "--out",
        inverted.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&inverted).unwrap()).unwrap();
    let c0 = &value["eta"]["coeffs"][value["eta"]["degree"].as_u64().unwrap() as usize];
    assert!((c0[0].as_f64().unwrap() + 0.75).abs() < 1e-12);
}

#[test]
fn written_artifacts_reserialize_identically() {
    // Write once through the CLI, read and re-emit: byte-identical modulo
    // nothing — the decimal encoding is exact at 17 significant digits.
    let field = tmp("field_rt.json");
    write(&field, &constant_field(0.05, 2));
    let diffeo = tmp("evol_rt.json");
    let out = run(&[
        "evol",
        field.to_str().unwrap(),
        "--step",
        "1e-2",
        "--out",
        diffeo.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let again = tmp("evol_rt2.json");
    let out = run(&[
        "invert",
        diffeo.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // Inverting twice lands back on the first artifact bit for bit.
    let back = tmp("evol_rt3.json");
    let out = run(&[
        "invert",
        again.to_str().unwrap(),
        "--out",
        back.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let first: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&diffeo).unwrap()).unwrap();
    let third: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&back).unwrap()).unwrap();
    let degree = first["eta"]["degree"].as_u64().unwrap() as usize;
    let c0_first = first["eta"]["coeffs"][degree][0].as_f64().unwrap();
    let c0_third = third["eta"]["coeffs"][degree][0].as_f64().unwrap();
    assert!((c0_first - c0_third).abs() < 1e-9);
}

#[test]
fn certify_reports_ball_membership() {
    let field = tmp("field_cert.json");
    write(&field, &constant_field(0.05, 2));
    let out = run(&["certify", field.to_str().unwrap(), "--level", "2"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["holds"], true);
    assert!((value["radius"].as_f64().unwrap() - 0.125).abs() < 1e-15);

    let big = tmp("field_big.json");
    write(&big, &constant_field(0.2, 2));
    let out = run(&["certify", big.to_str().unwrap(), "--level", "2"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["holds"], false);
}

#[test]
fn flow_emits_trajectory_csv() {
    let field = tmp("field_flow.json");
    write(&field, &constant_field(0.05, 2));
    let out = run(&[
        "flow",
        field.to_str().unwrap(),
        "--step",
        "0.1",
        "--degree",
        "8",
        "--dump",
        "coeffs",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("t,re_-8,im_-8"));
    assert_eq!(lines.len(), 1 + 11); // header + t = 0, 0.1, ..., 1.0
                                     // Constant field: the constant mode grows linearly in t.
    let last: Vec<&str> = lines[11].split(',').collect();
    let t: f64 = last[0].parse().unwrap();
    let c0_re: f64 = last[1 + 2 * 8].parse().unwrap();
    assert!((t - 1.0).abs() < 1e-12);
    assert!((c0_re - 0.05).abs() < 1e-9);
}

#[test]
fn mu_of_constant_and_anything_is_the_constant() {
    let eta1 = tmp("mu_eta1.json");
    write(&eta1, r#"{"degree": 0, "coeffs": [[0.7, 0.0]]}"#);
    let eta2 = tmp("mu_eta2.json");
    write(
        &eta2,
        r#"{"degree": 1, "coeffs": [[0.05, 0.025], [0.1, 0.0], [0.05, -0.025]]}"#,
    );
    let out = run(&["mu", eta1.to_str().unwrap(), eta2.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let degree = value["degree"].as_u64().unwrap() as usize;
    for (i, pair) in value["coeffs"].as_array().unwrap().iter().enumerate() {
        let expect = if i == degree { 0.7 } else { 0.0 };
        assert!((pair[0].as_f64().unwrap() - expect).abs() < 1e-12);
    }
}

#[test]
fn bracket_of_sine_and_cosine_is_one() {
    let x = tmp("bracket_x.json");
    // sin(theta): c_1 = -i/2, c_-1 = i/2.
    write(
        &x,
        r#"{"degree": 1, "coeffs": [[0.0, 0.5], [0.0, 0.0], [0.0, -0.5]]}"#,
    );
    let y = tmp("bracket_y.json");
    write(
        &y,
        r#"{"degree": 1, "coeffs": [[0.5, 0.0], [0.0, 0.0], [0.5, 0.0]]}"#,
    );
    let out = run(&["bracket", x.to_str().unwrap(), y.to_str().unwrap()]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let degree = value["degree"].as_u64().unwrap() as usize;
    for (i, pair) in value["coeffs"].as_array().unwrap().iter().enumerate() {
        let expect = if i == degree { 1.0 } else { 0.0 };
        assert!((pair[0].as_f64().unwrap() - expect).abs() < 1e-12);
        assert!(pair[1].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn lipschitz_probe_of_constant_fields_is_near_one() {
    let center = tmp("lip_center.json");
    write(&center, &constant_field(0.05, 2));
    let pert = tmp("lip_pert.json");
    write(&pert, &constant_field(0.05 + 1e-4, 2));
    let out = run(&[
        "lipschitz",
        center.to_str().unwrap(),
        "--perturb",
        pert.to_str().unwrap(),
        "--step",
        "1e-2",
        "--degree",
        "16",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ratio = value["ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 1e-2, "ratio {ratio}");
    assert_eq!(value["perturbations"], 1);
}

#[test]
fn usage_errors_exit_one() {
    let out = run(&["no-such-subcommand"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["evol", "/nonexistent/field.json"]);
    assert_eq!(out.status.code(), Some(1));

    // Step outside (0, 0.1] is a usage error.
    let field = tmp("field_step.json");
    write(&field, &constant_field(0.05, 2));
    let out = run(&["evol", field.to_str().unwrap(), "--step", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn domain_errors_exit_two() {
    // eta = 3.2 > pi: leaves the chart.
    let eta_big = tmp("eta_big.json");
    write(&eta_big, r#"{"degree": 0, "coeffs": [[3.2, 0.0]]}"#);
    let eta_ok = tmp("eta_ok.json");
    write(&eta_ok, r#"{"degree": 0, "coeffs": [[0.3, 0.0]]}"#);
    let out = run(&["mu", eta_big.to_str().unwrap(), eta_ok.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // Obstruction level meeting the pole ring is a domain error.
    let out = run(&["obstruction", "--R", "0.4", "--level", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}
