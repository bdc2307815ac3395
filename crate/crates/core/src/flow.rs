//! Time-dependent analytic vector fields on the circle and their flows:
//! fixed-step RK4 integration in the angle lift, the evolution and
//! exponential maps, the Lie bracket, confinement certificates for the
//! radius-1/(4n) balls, and an empirical Lipschitz probe of `evol`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::diffeo::{chart_out, invert, CircleDiffeo, RealCircleFunction, Resolution};
use crate::error::{Error, Result};
use crate::laurent::{angle_grid, AnnulusLevel, LaurentSeries};

/// Interpolation of the field between time knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interpolation {
    /// C^0 in time. Admissible for integration, but below the C^1
    /// regularity the evolution theory asks for.
    #[serde(rename = "piecewise-linear")]
    PiecewiseLinear,
    /// Catmull-Rom cubic Hermite on the coefficients: a C^1 curve in time.
    #[serde(rename = "cubic-hermite")]
    CubicHermite,
}

/// Number of dense time samples used for conservative sup bounds.
const TIME_SAMPLES: usize = 129;

/// A curve `t -> gamma(t)` of circle vector fields on `[0, 1]`, stored as
/// knot values with a fixed interpolation rule, certified at an annulus
/// level with a conservative bound on `sup_t ||gamma(t)||`.
#[derive(Debug, Clone)]
pub struct TimeDependentField {
    knots: Vec<(f64, RealCircleFunction)>,
    interpolation: Interpolation,
    level: AnnulusLevel,
    degree: usize,
    /// Coefficient vectors of the knots, padded to a common degree.
    knot_coeffs: Vec<Vec<Complex64>>,
    /// Hermite tangents (same layout), empty for piecewise-linear.
    tangents: Vec<Vec<Complex64>>,
    sup_bound: f64,
}

impl TimeDependentField {
    pub fn new(
        knots: Vec<(f64, RealCircleFunction)>,
        interpolation: Interpolation,
        level: AnnulusLevel,
    ) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidKnots {
                reason: format!("need at least 2 knots, got {}", knots.len()),
            });
        }
        if knots[0].0.abs() > 1e-12 {
            return Err(Error::InvalidKnots {
                reason: format!("first knot at t = {}, expected 0", knots[0].0),
            });
        }
        let last = knots[knots.len() - 1].0;
        if (last - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidKnots {
                reason: format!("last knot at t = {last}, expected 1"),
            });
        }
        for pair in knots.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::InvalidKnots {
                    reason: format!("knot times not strictly increasing at t = {}", pair[1].0),
                });
            }
        }
        let mut knots = knots;
        knots[0].0 = 0.0;
        let last = knots.len() - 1;
        knots[last].0 = 1.0;

        let degree = knots.iter().map(|(_, f)| f.degree()).max().unwrap_or(0);
        let knot_coeffs: Vec<Vec<Complex64>> = knots
            .iter()
            .map(|(_, f)| padded_coeffs(f.series(), degree))
            .collect();
        let tangents = match interpolation {
            Interpolation::PiecewiseLinear => Vec::new(),
            Interpolation::CubicHermite => catmull_rom_tangents(&knots, &knot_coeffs),
        };
        let mut field = Self {
            knots,
            interpolation,
            level,
            degree,
            knot_coeffs,
            tangents,
            sup_bound: 0.0,
        };
        field.sup_bound = field.sup_norm_upper_at(level);
        Ok(field)
    }

    /// The constant-in-time field `t -> x`.
    pub fn constant(x: &RealCircleFunction, level: AnnulusLevel) -> Self {
        Self::new(
            vec![(0.0, x.clone()), (1.0, x.clone())],
            Interpolation::PiecewiseLinear,
            level,
        )
        .expect("two-knot constant field is well formed")
    }

    pub fn knots(&self) -> &[(f64, RealCircleFunction)] {
        &self.knots
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn level(&self) -> AnnulusLevel {
        self.level
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Conservative bound on `sup_t ||gamma(t)||` at the field's level.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// True when the time interpolation is C^1 (the regularity the
    /// evolution theory assumes; piecewise-linear curves are merely C^0).
    pub fn c1_in_time(&self) -> bool {
        matches!(self.interpolation, Interpolation::CubicHermite)
    }

    /// Interpolated coefficient vector at time `t` (clamped to [0, 1]).
    pub fn coeffs_at(&self, t: f64) -> Vec<Complex64> {
        let t = t.clamp(0.0, 1.0);
        let seg = self.segment(t);
        let (t0, _) = self.knots[seg];
        let (t1, _) = self.knots[seg + 1];
        let h = t1 - t0;
        let s = (t - t0) / h;
        let a = &self.knot_coeffs[seg];
        let b = &self.knot_coeffs[seg + 1];
        match self.interpolation {
            Interpolation::PiecewiseLinear => a
                .iter()
                .zip(b)
                .map(|(&ca, &cb)| ca * (1.0 - s) + cb * s)
                .collect(),
            Interpolation::CubicHermite => {
                let (h00, h10, h01, h11) = hermite_basis(s);
                let ma = &self.tangents[seg];
                let mb = &self.tangents[seg + 1];
                a.iter()
                    .zip(b)
                    .zip(ma.iter().zip(mb))
                    .map(|((&ca, &cb), (&ta, &tb))| {
                        ca * h00 + cb * h01 + ta * (h10 * h) + tb * (h11 * h)
                    })
                    .collect()
            }
        }
    }

    /// The field at time `t` as a circle function.
    pub fn field_at(&self, t: f64) -> RealCircleFunction {
        let coeffs = self.coeffs_at(t);
        let series = LaurentSeries::new(self.degree, coeffs).expect("padded length");
        RealCircleFunction::project(&series).expect("interpolants of Hermitian knots")
    }

    fn segment(&self, t: f64) -> usize {
        let mut seg = self.knots.len() - 2;
        for (i, pair) in self.knots.windows(2).enumerate() {
            if t < pair[1].0 {
                seg = i;
                break;
            }
        }
        seg
    }

    /// `max_t sum_k |c_k(t)| e^(|k|/n)` over knots and a dense time grid.
    fn sup_norm_upper_at(&self, level: AnnulusLevel) -> f64 {
        let weights: Vec<f64> = (0..2 * self.degree + 1)
            .map(|i| level.weight(i as i64 - self.degree as i64))
            .collect();
        let norm_of = |coeffs: &[Complex64]| -> f64 {
            coeffs.iter().zip(&weights).map(|(c, w)| c.norm() * w).sum()
        };
        let mut sup = self
            .knot_coeffs
            .iter()
            .map(|c| norm_of(c))
            .fold(0.0, f64::max);
        for j in 0..TIME_SAMPLES {
            let t = j as f64 / (TIME_SAMPLES - 1) as f64;
            sup = sup.max(norm_of(&self.coeffs_at(t)));
        }
        sup
    }
}

fn padded_coeffs(series: &LaurentSeries, degree: usize) -> Vec<Complex64> {
    (-(degree as i64)..=degree as i64)
        .map(|k| series.coeff(k))
        .collect()
}

fn catmull_rom_tangents(
    knots: &[(f64, RealCircleFunction)],
    coeffs: &[Vec<Complex64>],
) -> Vec<Vec<Complex64>> {
    let n = knots.len();
    let mut tangents = Vec::with_capacity(n);
    for j in 0..n {
        let (lo, hi) = if j == 0 {
            (0, 1)
        } else if j == n - 1 {
            (n - 2, n - 1)
        } else {
            (j - 1, j + 1)
        };
        let dt = knots[hi].0 - knots[lo].0;
        let tangent = coeffs[hi]
            .iter()
            .zip(&coeffs[lo])
            .map(|(&a, &b)| (a - b) / dt)
            .collect();
        tangents.push(tangent);
    }
    tangents
}

fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

/// Certificate that a field curve stays inside the radius-1/(4n) ball of
/// `C([0,1], E_n^b)` on which flows are guaranteed global and confined.
#[derive(Debug, Clone, Serialize)]
pub struct BallCertificate {
    pub level: AnnulusLevel,
    pub radius: f64,
    pub holds: bool,
    pub margin: f64,
}

/// Checks `sup_t ||gamma(t)||_n < 1/(4n)` (strict).
pub fn ball_certificate(field: &TimeDependentField, n: u32) -> Result<BallCertificate> {
    let level = AnnulusLevel::new(n)?;
    let radius = 1.0 / (4.0 * n as f64);
    let sup = field.sup_norm_upper_at(level);
    Ok(BallCertificate {
        level,
        radius,
        holds: sup < radius,
        margin: radius - sup,
    })
}

/// A numerically integrated flow: diffeomorphism states along increasing
/// times, the largest pointwise excursion `|gamma_t(z) - z|` observed over
/// the whole trajectory, and the ball certificate status of the field.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CircleDiffeo>,
    pub max_displacement: f64,
    /// Whether the field held its ball certificate at its own level. When
    /// false the integration still ran; the confinement guarantee does not
    /// apply.
    pub certified: bool,
    pub level: AnnulusLevel,
}

enum Record {
    All,
    EndpointOnly,
}

/// Classical fixed-step RK4 on the angle lifts `u_m' = gamma(t)(e^(i u_m))`
/// over the uniform grid, refitting `eta(t) = u(t) - theta` spectrally at
/// every recorded time.
pub fn integrate_flow(
    field: &TimeDependentField,
    step: f64,
    t_end: f64,
    res: &Resolution,
) -> Result<FlowTrajectory> {
    integrate(field, step, t_end, res, Record::All)
}

/// The evolution map: the time-1 flow of the field.
pub fn evol(field: &TimeDependentField, step: f64, res: &Resolution) -> Result<CircleDiffeo> {
    let traj = integrate(field, step, 1.0, res, Record::EndpointOnly)?;
    Ok(traj.states.into_iter().last().expect("endpoint recorded"))
}

fn integrate(
    field: &TimeDependentField,
    step: f64,
    t_end: f64,
    res: &Resolution,
    record: Record,
) -> Result<FlowTrajectory> {
    res.validate()?;
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidStep { step, max: 1.0 });
    }
    if !(t_end > 0.0 && t_end <= 1.0) {
        return Err(Error::InvalidKnots {
            reason: format!("t_end = {t_end} outside (0, 1]"),
        });
    }
    let certificate = ball_certificate(field, field.level().index())?;

    let n_steps = (t_end / step).ceil() as usize;
    let h = t_end / n_steps as f64;
    let thetas = angle_grid(res.samples);
    let points: Vec<Complex64> = thetas
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .collect();
    let mut u = thetas.clone();

    let mut times = vec![0.0];
    let mut states = vec![CircleDiffeo::identity()];
    let mut max_displacement: f64 = 0.0;

    let degree = field.degree();
    let mut k1 = vec![0.0; u.len()];
    let mut k2 = vec![0.0; u.len()];
    let mut k3 = vec![0.0; u.len()];
    let mut k4 = vec![0.0; u.len()];

    for istep in 0..n_steps {
        let t = istep as f64 * h;
        let c_start = field.coeffs_at(t);
        let c_half = field.coeffs_at(t + 0.5 * h);
        let c_full = field.coeffs_at(t + h);
        for m in 0..u.len() {
            k1[m] = eval_real_on_circle(&c_start, degree, u[m]);
        }
        for m in 0..u.len() {
            k2[m] = eval_real_on_circle(&c_half, degree, u[m] + 0.5 * h * k1[m]);
        }
        for m in 0..u.len() {
            k3[m] = eval_real_on_circle(&c_half, degree, u[m] + 0.5 * h * k2[m]);
        }
        for m in 0..u.len() {
            k4[m] = eval_real_on_circle(&c_full, degree, u[m] + h * k3[m]);
        }
        let t_next = if istep + 1 == n_steps {
            t_end
        } else {
            (istep + 1) as f64 * h
        };
        for m in 0..u.len() {
            u[m] += h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
            if !u[m].is_finite() {
                return Err(Error::NumericalFailure { t: t_next });
            }
            let eta = u[m] - thetas[m];
            if eta.abs() >= PI {
                return Err(Error::ChartOverflow { sup: eta.abs() });
            }
            let disp = (Complex64::from_polar(1.0, u[m]) - points[m]).norm();
            if disp > max_displacement {
                max_displacement = disp;
            }
        }
        let record_this = match record {
            Record::All => true,
            Record::EndpointOnly => istep + 1 == n_steps,
        };
        if record_this {
            let eta_values: Vec<f64> = u.iter().zip(&thetas).map(|(&a, &b)| a - b).collect();
            let eta = RealCircleFunction::fit_from_real_samples(&eta_values, res.degree)?;
            states.push(chart_out(&eta, res)?);
            times.push(t_next);
        }
    }

    if certificate.holds {
        // Lemma-level confinement, restated measurably: certified fields
        // must stay within the 1/(4n) ball along the whole flow.
        debug_assert!(
            max_displacement < certificate.radius,
            "certified field escaped the confinement ball: {} >= {}",
            max_displacement,
            certificate.radius
        );
    }

    Ok(FlowTrajectory {
        times,
        states,
        max_displacement,
        certified: certificate.holds,
        level: field.level(),
    })
}

/// Horner evaluation of a padded coefficient vector at `e^(iu)`, returning
/// the real part (the imaginary part of a Hermitian series on the circle is
/// rounding noise).
fn eval_real_on_circle(coeffs: &[Complex64], degree: usize, u: f64) -> f64 {
    let z = Complex64::from_polar(1.0, u);
    let mid = degree;
    let mut pos = Complex64::new(0.0, 0.0);
    for &c in coeffs[mid + 1..].iter().rev() {
        pos = pos * z + c;
    }
    pos *= z;
    let w = z.conj(); // 1/z on the unit circle
    let mut neg = Complex64::new(0.0, 0.0);
    for &c in &coeffs[..mid] {
        neg = neg * w + c;
    }
    neg *= w;
    (coeffs[mid] + pos + neg).re
}

/// Recovers the right logarithmic derivative `gamma(t) = u'(t) o u(t)^(-1)`
/// of a trajectory by second-order finite differences in time and Newton
/// inversion of each state.
pub fn right_log_derivative(traj: &FlowTrajectory, res: &Resolution) -> Result<TimeDependentField> {
    res.validate()?;
    let n = traj.times.len();
    if n < 3 {
        return Err(Error::TrajectoryTooShort {
            required: 3,
            got: n,
        });
    }
    let thetas = angle_grid(res.samples);
    // Lift values u_m(t_j) on the fixed grid.
    let lifts: Vec<Vec<f64>> = traj
        .states
        .iter()
        .map(|state| thetas.iter().map(|&th| state.lift(th)).collect())
        .collect();

    let mut knots = Vec::with_capacity(n);
    for j in 0..n {
        let (ja, jb, jc) = if j == 0 {
            (0, 1, 2)
        } else if j == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (j - 1, j, j + 1)
        };
        let (ta, tb, tc) = (traj.times[ja], traj.times[jb], traj.times[jc]);
        let t = traj.times[j];
        // Differentiated 3-point Lagrange weights at t.
        let wa = (2.0 * t - tb - tc) / ((ta - tb) * (ta - tc));
        let wb = (2.0 * t - ta - tc) / ((tb - ta) * (tb - tc));
        let wc = (2.0 * t - ta - tb) / ((tc - ta) * (tc - tb));
        let du: Vec<f64> = (0..thetas.len())
            .map(|m| wa * lifts[ja][m] + wb * lifts[jb][m] + wc * lifts[jc][m])
            .collect();
        // du(theta) = gamma(t)(e^(i u(theta))): push back through the
        // inverse lift to sample gamma on the uniform grid.
        let du_fn = RealCircleFunction::fit_from_real_samples(&du, res.degree)?;
        let inverse = invert(&traj.states[j], res)?;
        let gamma_values: Vec<f64> = thetas
            .iter()
            .map(|&th| du_fn.eval_theta(inverse.lift(th)))
            .collect();
        let gamma = RealCircleFunction::fit_from_real_samples(&gamma_values, res.degree)?;
        knots.push((traj.times[j], gamma));
    }
    TimeDependentField::new(knots, Interpolation::CubicHermite, traj.level)
}

/// The Lie-group exponential: time-1 flow of the autonomous field `x`.
///
/// Certifies `x` at the smallest level whose ball contains it; if none does,
/// integration proceeds uncertified (the ball is sufficient, not necessary).
pub fn exp(x: &RealCircleFunction, step: f64, res: &Resolution) -> Result<CircleDiffeo> {
    let level = certifying_level(x).unwrap_or(AnnulusLevel::new(1).expect("level 1"));
    let field = TimeDependentField::constant(x, level);
    evol(&field, step, res)
}

fn certifying_level(x: &RealCircleFunction) -> Option<AnnulusLevel> {
    for n in 1..=crate::silva::LEVEL_CAP {
        let level = AnnulusLevel::new(n).expect("positive");
        let norm: f64 = x
            .series()
            .terms()
            .map(|(k, c)| c.norm() * level.weight(k))
            .sum();
        if norm < 1.0 / (4.0 * n as f64) {
            return Some(level);
        }
    }
    None
}

/// The Lie bracket of the algebra of `Diff^omega(S^1)`: the negative of the
/// vector-field bracket, `-(X Y' - Y X')` with `' = d/d theta`. Computed on
/// a grid sized for the exact product degree, then truncated to the
/// configured degree.
#[derive(Debug, Clone)]
pub struct Bracket {
    pub field: RealCircleFunction,
    /// Coefficient mass discarded by the truncation to `res.degree`.
    pub truncation_tail: f64,
}

pub fn bracket(x: &RealCircleFunction, y: &RealCircleFunction, res: &Resolution) -> Bracket {
    let full_degree = x.degree() + y.degree();
    let samples = 2 * (2 * full_degree + 1) + 2;
    let dx = x.derivative_theta();
    let dy = y.derivative_theta();
    let values: Vec<f64> = angle_grid(samples)
        .into_iter()
        .map(|th| -(x.eval_theta(th) * dy.eval_theta(th) - y.eval_theta(th) * dx.eval_theta(th)))
        .collect();
    let exact = RealCircleFunction::fit_from_real_samples(&values, full_degree)
        .expect("grid sized for the exact product degree");
    let (truncated, tail) = exact.series().truncate(res.degree);
    let field = RealCircleFunction::project(&truncated).expect("truncation keeps symmetry");
    Bracket {
        field,
        truncation_tail: tail,
    }
}

/// Empirical Lipschitz constant of `evol` around a center field: the largest
/// ratio (grid distance between evolution endpoints) / (sup-in-t grid
/// distance between the fields). Perturbations equal to the center are
/// skipped; with nothing to compare the probe reports 0.
pub fn lipschitz_probe(
    center: &TimeDependentField,
    perturbations: &[TimeDependentField],
    step: f64,
    res: &Resolution,
) -> Result<f64> {
    let n = center.level().index();
    for field in std::iter::once(center).chain(perturbations) {
        let cert = ball_certificate(field, n)?;
        if !cert.holds {
            return Err(Error::NotCertified {
                level: n,
                sup_bound: field.sup_norm_upper_at(cert.level),
                radius: cert.radius,
            });
        }
    }
    let base = evol(center, step, res)?;
    let grid = crate::laurent::unit_circle_grid(res.samples);
    let mut ratio: f64 = 0.0;
    for pert in perturbations {
        let end = evol(pert, step, res)?;
        let mut endpoint_dist: f64 = 0.0;
        for &z in &grid {
            let d = (base.apply(z)? - end.apply(z)?).norm();
            endpoint_dist = endpoint_dist.max(d);
        }
        let mut field_dist: f64 = 0.0;
        let degree = center.degree().max(pert.degree());
        for j in 0..TIME_SAMPLES {
            let t = j as f64 / (TIME_SAMPLES - 1) as f64;
            let fc = padded_to(&center.coeffs_at(t), center.degree(), degree);
            let fp = padded_to(&pert.coeffs_at(t), pert.degree(), degree);
            for th in angle_grid(64) {
                let a = eval_real_on_circle(&fc, degree, th);
                let b = eval_real_on_circle(&fp, degree, th);
                field_dist = field_dist.max((a - b).abs());
            }
        }
        if field_dist > 1e-300 {
            ratio = ratio.max(endpoint_dist / field_dist);
        }
    }
    Ok(ratio)
}

fn padded_to(coeffs: &[Complex64], degree: usize, target: usize) -> Vec<Complex64> {
    if target == degree {
        return coeffs.to_vec();
    }
    let pad = target - degree;
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * target + 1];
    out[pad..pad + coeffs.len()].copy_from_slice(coeffs);
    out
}

// --- JSON wire format ------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct KnotRepr {
    t: f64,
    field: LaurentSeries,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    interpolation: Interpolation,
    level: u32,
    knots: Vec<KnotRepr>,
}

impl Serialize for TimeDependentField {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FieldRepr {
            interpolation: self.interpolation,
            level: self.level.index(),
            knots: self
                .knots
                .iter()
                .map(|(t, f)| KnotRepr {
                    t: *t,
                    field: f.series().clone(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TimeDependentField {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = FieldRepr::deserialize(deserializer)?;
        let level = AnnulusLevel::new(repr.level).map_err(D::Error::custom)?;
        let knots = repr
            .knots
            .into_iter()
            .map(|k| {
                RealCircleFunction::from_series(k.field)
                    .map(|f| (k.t, f))
                    .map_err(D::Error::custom)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        TimeDependentField::new(knots, repr.interpolation, level).map_err(D::Error::custom)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::diffeo::compose;
    use crate::rng::SplitMix64;

    fn level(n: u32) -> AnnulusLevel {
        AnnulusLevel::new(n).unwrap()
    }

    fn res32() -> Resolution {
        Resolution::for_degree(32)
    }

    fn sup_eta_distance(a: &CircleDiffeo, b: &CircleDiffeo, len: usize) -> f64 {
        angle_grid(len)
            .into_iter()
            .map(|th| (a.eta().eval_theta(th) - b.eta().eval_theta(th)).abs())
            .fold(0.0, f64::max)
    }

    /// Random field certified at the given level: decaying random knots,
    /// rescaled so the sup bound sits at `fill` of the ball radius.
    pub(crate) fn random_certified_field(
        rng: &mut SplitMix64,
        n: u32,
        degree: usize,
        knot_count: usize,
        fill: f64,
    ) -> TimeDependentField {
        let lvl = level(n);
        let raw: Vec<(f64, RealCircleFunction)> = (0..knot_count)
            .map(|j| {
                let t = j as f64 / (knot_count - 1) as f64;
                (t, crate::diffeo::tests::random_eta(rng, degree, 1.0))
            })
            .collect();
        let draft = TimeDependentField::new(raw.clone(), Interpolation::CubicHermite, lvl).unwrap();
        let target = fill / (4.0 * n as f64);
        let scale = target / draft.sup_bound();
        let knots = raw.into_iter().map(|(t, f)| (t, f.scale(scale))).collect();
        TimeDependentField::new(knots, Interpolation::CubicHermite, lvl).unwrap()
    }

    #[test]
    fn zero_field_flows_to_identity() {
        let field = TimeDependentField::constant(&RealCircleFunction::zero(), level(2));
        let traj = integrate_flow(&field, 0.05, 1.0, &res32()).unwrap();
        assert_eq!(traj.times.len(), traj.states.len());
        assert!(traj.max_displacement < 1e-15);
        for state in &traj.states {
            assert!(state.eta().sup_on_grid(64) < 1e-13);
        }
    }

    #[test]
    fn constant_field_flows_to_rotation() {
        let c = 0.1;
        let field = TimeDependentField::constant(&RealCircleFunction::constant(c), level(2));
        let traj = integrate_flow(&field, 1e-3, 1.0, &res32()).unwrap();
        for (t, state) in traj.times.iter().zip(&traj.states) {
            let expect = CircleDiffeo::rotation(c * t).unwrap();
            assert!(sup_eta_distance(state, &expect, 64) < 1e-8);
        }
        assert!(traj.certified);
    }

    #[test]
    fn linear_in_time_constant_field_flows_to_quadratic_rotation() {
        // gamma(t) = 2t (constant in space): u(t) = theta + t^2.
        let knots = vec![
            (0.0, RealCircleFunction::constant(0.0)),
            (1.0, RealCircleFunction::constant(2.0 * 0.1)),
        ];
        let field =
            TimeDependentField::new(knots, Interpolation::PiecewiseLinear, level(1)).unwrap();
        let traj = integrate_flow(&field, 1e-2, 1.0, &res32()).unwrap();
        for (t, state) in traj.times.iter().zip(&traj.states) {
            let expect = CircleDiffeo::rotation(0.1 * t * t).unwrap();
            assert!(sup_eta_distance(state, &expect, 64) < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn evol_is_trajectory_endpoint() {
        let mut rng = SplitMix64::new(21);
        let field = random_certified_field(&mut rng, 2, 6, 3, 0.8);
        let res = res32();
        let endpoint = evol(&field, 0.01, &res).unwrap();
        let traj = integrate_flow(&field, 0.01, 1.0, &res).unwrap();
        let last = traj.states.last().unwrap();
        assert!(sup_eta_distance(&endpoint, last, 64) < 1e-14);
    }

    #[test]
    fn right_log_derivative_of_identity_trajectory_is_zero() {
        let field = TimeDependentField::constant(&RealCircleFunction::zero(), level(2));
        let traj = integrate_flow(&field, 0.05, 1.0, &res32()).unwrap();
        let recovered = right_log_derivative(&traj, &res32()).unwrap();
        for (_, knot) in recovered.knots() {
            assert!(knot.sup_on_grid(64) < 1e-11);
        }
    }

    #[test]
    fn right_log_derivative_of_rotation_is_constant() {
        let c = 0.07;
        let field = TimeDependentField::constant(&RealCircleFunction::constant(c), level(2));
        let traj = integrate_flow(&field, 0.02, 1.0, &res32()).unwrap();
        let recovered = right_log_derivative(&traj, &res32()).unwrap();
        for (_, knot) in recovered.knots() {
            let err: f64 = angle_grid(64)
                .into_iter()
                .map(|th| (knot.eval_theta(th) - c).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-9);
        }
    }

    #[test]
    fn right_log_derivative_round_trip() {
        let mut rng = SplitMix64::new(22);
        let field = random_certified_field(&mut rng, 2, 6, 5, 0.8);
        let res = res32();
        let traj = integrate_flow(&field, 1e-3, 1.0, &res).unwrap();
        let recovered = right_log_derivative(&traj, &res).unwrap();
        let mut err: f64 = 0.0;
        for (t, knot) in recovered.knots().iter().step_by(50) {
            let original = field.field_at(*t);
            for th in angle_grid(64) {
                err = err.max((knot.eval_theta(th) - original.eval_theta(th)).abs());
            }
        }
        assert!(err < 1e-4, "recovery error {err}");
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = exp(&RealCircleFunction::zero(), 0.05, &res32()).unwrap();
        assert!(e.eta().sup_on_grid(64) < 1e-13);
    }

    #[test]
    fn exp_of_constant_is_rotation() {
        let e = exp(&RealCircleFunction::constant(0.05), 1e-3, &res32()).unwrap();
        let expect = CircleDiffeo::rotation(0.05).unwrap();
        assert!(sup_eta_distance(&e, &expect, 64) < 1e-9);
    }

    #[test]
    fn exp_inverse_flow_cancels() {
        let mut rng = SplitMix64::new(23);
        let res = res32();
        for _ in 0..3 {
            let x = crate::diffeo::tests::random_eta(&mut rng, 6, 0.05);
            let fwd = exp(&x, 1e-3, &res).unwrap();
            let bwd = exp(&x.scale(-1.0), 1e-3, &res).unwrap();
            let id = compose(&fwd, &bwd, &res).unwrap();
            assert!(id.eta().sup_on_grid(res.samples) < 1e-6);
        }
    }

    #[test]
    fn exp_semigroup_property() {
        let res = res32();
        let x = RealCircleFunction::sine(1, 0.04).add(&RealCircleFunction::constant(0.03));
        let s = 0.4;
        let t = 0.6;
        let half_s = exp(&x.scale(s), 1e-3, &res).unwrap();
        let half_t = exp(&x.scale(t), 1e-3, &res).unwrap();
        let whole = exp(&x, 1e-3, &res).unwrap();
        let glued = compose(&half_s, &half_t, &res).unwrap();
        assert!(sup_eta_distance(&whole, &glued, 64) < 1e-6);
    }

    #[test]
    fn bracket_is_antisymmetric_and_matches_symbolic_case() {
        let res = res32();
        let x = RealCircleFunction::sine(1, 1.0);
        let y = RealCircleFunction::cosine(1, 1.0);
        // [X, Y]_vect = sin * (-sin) - cos * cos = -1, so bracket = +1.
        let b = bracket(&x, &y, &res);
        for th in angle_grid(64) {
            assert!((b.field.eval_theta(th) - 1.0).abs() < 1e-12);
        }
        let bxx = bracket(&x, &x, &res);
        assert!(bxx.field.sup_on_grid(64) < 1e-13);
        // Antisymmetry.
        let byx = bracket(&y, &x, &res);
        for th in angle_grid(64) {
            assert!((b.field.eval_theta(th) + byx.field.eval_theta(th)).abs() < 1e-12);
        }
    }

    #[test]
    fn bracket_matches_commutator_of_flows() {
        let res = Resolution::for_degree(48);
        let x = RealCircleFunction::sine(1, 0.05);
        let y = RealCircleFunction::cosine(1, 0.05);
        let b = bracket(&x, &y, &res);
        let mut errors = Vec::new();
        for s in [1e-1, 1e-2] {
            let a1 = exp(&x.scale(s), 1e-3, &res).unwrap();
            let a2 = exp(&y.scale(s), 1e-3, &res).unwrap();
            let a3 = exp(&x.scale(-s), 1e-3, &res).unwrap();
            let a4 = exp(&y.scale(-s), 1e-3, &res).unwrap();
            let commutator = compose(
                &compose(&a1, &a2, &res).unwrap(),
                &compose(&a3, &a4, &res).unwrap(),
                &res,
            )
            .unwrap();
            let err: f64 = angle_grid(64)
                .into_iter()
                .map(|th| {
                    (commutator.eta().eval_theta(th) / (s * s) - b.field.eval_theta(th)).abs()
                })
                .fold(0.0, f64::max);
            errors.push(err);
        }
        // First-order convergence in s.
        assert!(errors[1] < errors[0]);
        assert!(errors[1] < 0.05 * 0.05, "commutator error {}", errors[1]);
    }

    #[test]
    fn ball_certificate_examples() {
        let zero = TimeDependentField::constant(&RealCircleFunction::zero(), level(3));
        let cert = ball_certificate(&zero, 3).unwrap();
        assert!(cert.holds);
        assert!((cert.margin - 1.0 / 12.0).abs() < 1e-15);

        // Exactly on the boundary: strict inequality fails.
        let n = 2;
        let boundary = TimeDependentField::constant(
            &RealCircleFunction::constant(1.0 / (4.0 * n as f64)),
            level(n),
        );
        assert!(!ball_certificate(&boundary, n).unwrap().holds);
    }

    #[test]
    fn certified_field_confined_along_flow() {
        let mut rng = SplitMix64::new(24);
        let field = random_certified_field(&mut rng, 2, 6, 4, 0.9);
        let traj = integrate_flow(&field, 1e-2, 1.0, &res32()).unwrap();
        assert!(traj.certified);
        assert!(traj.max_displacement < 1.0 / 8.0);
    }

    #[test]
    fn uncertified_field_still_integrates_with_flag() {
        // Norm 0.3 > 1/8 at level 2: certificate fails, flow still fine.
        let field = TimeDependentField::constant(&RealCircleFunction::constant(0.3), level(2));
        let traj = integrate_flow(&field, 1e-2, 1.0, &res32()).unwrap();
        assert!(!traj.certified);
        assert!(
            (traj.max_displacement - (Complex64::from_polar(1.0, 0.3) - 1.0).norm()).abs() < 1e-10
        );
    }

    #[test]
    fn evolution_cocycle_property() {
        // Piecewise-linear field split at t = 0.5; both halves reparametrised
        // to [0, 1] exactly.
        let f0 = RealCircleFunction::constant(0.02);
        let f1 = RealCircleFunction::sine(1, 0.05).add(&RealCircleFunction::constant(0.04));
        let f2 = RealCircleFunction::cosine(1, 0.03);
        let whole = TimeDependentField::new(
            vec![(0.0, f0.clone()), (0.5, f1.clone()), (1.0, f2.clone())],
            Interpolation::PiecewiseLinear,
            level(2),
        )
        .unwrap();
        let first = TimeDependentField::new(
            vec![(0.0, f0.scale(0.5)), (1.0, f1.scale(0.5))],
            Interpolation::PiecewiseLinear,
            level(2),
        )
        .unwrap();
        let second = TimeDependentField::new(
            vec![(0.0, f1.scale(0.5)), (1.0, f2.scale(0.5))],
            Interpolation::PiecewiseLinear,
            level(2),
        )
        .unwrap();
        let res = res32();
        let full = evol(&whole, 1e-3, &res).unwrap();
        let glued = compose(
            &evol(&second, 1e-3, &res).unwrap(),
            &evol(&first, 1e-3, &res).unwrap(),
            &res,
        )
        .unwrap();
        assert!(sup_eta_distance(&full, &glued, 64) < 1e-6);
    }

    #[test]
    fn lipschitz_probe_on_identical_fields_is_zero() {
        let mut rng = SplitMix64::new(25);
        let field = random_certified_field(&mut rng, 2, 4, 3, 0.5);
        let probe = lipschitz_probe(&field, std::slice::from_ref(&field), 1e-2, &res32()).unwrap();
        assert_eq!(probe, 0.0);
    }

    #[test]
    fn lipschitz_probe_constant_fields() {
        let c = 0.05;
        let delta = 1e-4;
        let center = TimeDependentField::constant(&RealCircleFunction::constant(c), level(2));
        let pert = TimeDependentField::constant(&RealCircleFunction::constant(c + delta), level(2));
        let probe = lipschitz_probe(&center, &[pert], 1e-3, &res32()).unwrap();
        assert!((probe - 1.0).abs() < 1e-3, "probe = {probe}");
    }

    #[test]
    fn field_json_round_trip() {
        let mut rng = SplitMix64::new(26);
        let field = random_certified_field(&mut rng, 2, 4, 3, 0.7);
        let text = serde_json::to_string(&field).unwrap();
        let back: TimeDependentField = serde_json::from_str(&text).unwrap();
        assert_eq!(back.knots().len(), field.knots().len());
        assert_eq!(back.level(), field.level());
        assert_eq!(back.interpolation(), field.interpolation());
        for ((ta, fa), (tb, fb)) in field.knots().iter().zip(back.knots()) {
            assert_eq!(ta, tb);
            assert_eq!(fa.series(), fb.series());
        }
    }

    #[test]
    fn knot_validation() {
        let f = RealCircleFunction::zero();
        assert!(TimeDependentField::new(
            vec![(0.0, f.clone())],
            Interpolation::PiecewiseLinear,
            level(1)
        )
        .is_err());
        assert!(TimeDependentField::new(
            vec![(0.1, f.clone()), (1.0, f.clone())],
            Interpolation::PiecewiseLinear,
            level(1)
        )
        .is_err());
        assert!(TimeDependentField::new(
            vec![(0.0, f.clone()), (0.5, f.clone()), (0.4, f.clone())],
            Interpolation::PiecewiseLinear,
            level(1)
        )
        .is_err());
    }
}
