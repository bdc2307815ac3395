//! The group of real-analytic circle diffeomorphisms near the identity.
//!
//! A diffeomorphism close to `id` is written `gamma(z) = z e^(i eta(z))`
//! with a real-valued angle function `eta` on the circle; `eta` is the chart
//! coordinate. The local addition `(z, r) -> z e^(ir)` and the principal
//! argument give the chart and its inverse. Composition and inversion are
//! computed by sampling on a uniform circle grid and refitting the result
//! spectrally; `mu` is the precomposition map `(eta1, eta2) ->
//! eta1 o E(eta2)` with `E(eta)(z) = z e^(i eta(z))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::laurent::{angle_grid, fit_from_circle_samples, unit_circle_grid, LaurentSeries};

/// Max tolerated Hermitian asymmetry `|c_-k - conj(c_k)|`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Max tolerated `|Im eta|` on the validation grid.
pub const REALITY_TOL: f64 = 1e-10;
/// Distance to `w = -z` below which a pair counts as antipodal.
pub const ANTIPODAL_TOL: f64 = 1e-10;
/// Tolerated deviation of `|z|` from 1 for circle points.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;
/// Residual target of the Newton inversion on the lift.
pub const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITERS: usize = 50;
/// Grid length for the reality validation of a circle function.
const REALITY_GRID: usize = 256;

/// Spectral resolution of the sampling pipelines: refit degree and number
/// of uniform circle samples (oversampling factor 4 by default).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub degree: usize,
    pub samples: usize,
}

impl Resolution {
    /// 4x-oversampled grid for the given refit degree.
    pub fn for_degree(degree: usize) -> Self {
        Self {
            degree,
            samples: 4 * (2 * degree + 1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let required = 2 * (2 * self.degree + 1);
        if self.samples < required {
            return Err(Error::InsufficientSamples {
                degree: self.degree,
                required,
                got: self.samples,
            });
        }
        Ok(())
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Self::for_degree(crate::laurent::DEFAULT_DEGREE)
    }
}

/// A Laurent series with Hermitian symmetry `c_-k = conj(c_k)`, hence
/// real-valued on the unit circle. These are the angle fields `eta` (chart
/// coordinates of diffeomorphisms) and the vector fields on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct RealCircleFunction {
    series: LaurentSeries,
}

impl RealCircleFunction {
    /// Validates Hermitian symmetry and reality on the circle.
    pub fn from_series(series: LaurentSeries) -> Result<Self> {
        let asymmetry = hermitian_asymmetry(&series);
        if asymmetry > HERMITIAN_TOL {
            return Err(Error::NotHermitian { asymmetry });
        }
        let f = Self { series };
        let max_imag = f.max_imag_on_grid(REALITY_GRID);
        if max_imag > REALITY_TOL {
            return Err(Error::NotRealOnCircle { max_imag });
        }
        Ok(f)
    }

    /// Hermitian projection `c_k -> (c_k + conj(c_-k)) / 2`, then validation.
    /// Used by the sampling pipelines, whose raw coefficients carry rounding
    /// asymmetry of order machine epsilon.
    pub fn project(series: &LaurentSeries) -> Result<Self> {
        let degree = series.degree();
        let mut out = LaurentSeries::zero(degree);
        for k in 0..=degree as i64 {
            let avg = 0.5 * (series.coeff(k) + series.coeff(-k).conj());
            out.set_coeff(k, avg);
            out.set_coeff(-k, avg.conj());
        }
        // c_0 must be exactly real after projection.
        let c0 = out.coeff(0);
        out.set_coeff(0, Complex64::new(c0.re, 0.0));
        Self::from_series(out)
    }

    /// Fits real samples on the uniform unit-circle grid.
    pub fn fit_from_real_samples(values: &[f64], degree: usize) -> Result<Self> {
        let complex: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let series = fit_from_circle_samples(&complex, 1.0, degree)?;
        Self::project(&series)
    }

    pub fn constant(value: f64) -> Self {
        Self {
            series: LaurentSeries::constant(Complex64::new(value, 0.0)),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `amplitude * cos(k theta)` as a circle function.
    pub fn cosine(k: u32, amplitude: f64) -> Self {
        let half = Complex64::new(0.5 * amplitude, 0.0);
        let mut s = LaurentSeries::zero(k as usize);
        s.set_coeff(k as i64, half);
        s.set_coeff(-(k as i64), half);
        Self { series: s }
    }

    /// `amplitude * sin(k theta)` as a circle function.
    pub fn sine(k: u32, amplitude: f64) -> Self {
        let half = Complex64::new(0.0, -0.5 * amplitude);
        let mut s = LaurentSeries::zero(k as usize);
        s.set_coeff(k as i64, half);
        s.set_coeff(-(k as i64), half.conj());
        Self { series: s }
    }

    pub fn series(&self) -> &LaurentSeries {
        &self.series
    }

    pub fn degree(&self) -> usize {
        self.series.degree()
    }

    /// Real value at `e^(i theta)`.
    pub fn eval_theta(&self, theta: f64) -> f64 {
        self.series.eval_theta(theta).re
    }

    /// Complex evaluation (for points off the sampling grid but on or near
    /// the circle).
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.series.eval(z)
    }

    /// Values on the uniform grid of the given length.
    pub fn grid_values(&self, len: usize) -> Vec<f64> {
        angle_grid(len)
            .into_iter()
            .map(|theta| self.eval_theta(theta))
            .collect()
    }

    pub fn sup_on_grid(&self, len: usize) -> f64 {
        self.grid_values(len)
            .into_iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    fn max_imag_on_grid(&self, len: usize) -> f64 {
        angle_grid(len)
            .into_iter()
            .map(|theta| self.series.eval_theta(theta).im.abs())
            .fold(0.0f64, f64::max)
    }

    /// `d eta / d theta`, again Hermitian.
    pub fn derivative_theta(&self) -> Self {
        Self {
            series: self.series.derivative_theta(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            series: self.series.add(&other.series),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            series: self.series.scale(factor),
        }
    }
}

fn hermitian_asymmetry(series: &LaurentSeries) -> f64 {
    (0..=series.degree() as i64)
        .map(|k| (series.coeff(-k) - series.coeff(k).conj()).norm())
        .fold(0.0f64, f64::max)
}

impl Serialize for RealCircleFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.series.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RealCircleFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let series = LaurentSeries::deserialize(deserializer)?;
        Self::from_series(series).map_err(D::Error::custom)
    }
}

/// An orientation-preserving diffeomorphism `z -> z e^(i eta(z))` near the
/// identity, with a certificate that the lift `theta -> theta + eta(e^(i
/// theta))` is strictly increasing.
#[derive(Debug, Clone)]
pub struct CircleDiffeo {
    eta: RealCircleFunction,
    orientation_margin: f64,
}

impl CircleDiffeo {
    pub fn identity() -> Self {
        Self {
            eta: RealCircleFunction::zero(),
            orientation_margin: 1.0,
        }
    }

    /// The rigid rotation by `angle` (|angle| < pi to stay in the chart).
    pub fn rotation(angle: f64) -> Result<Self> {
        chart_out(
            &RealCircleFunction::constant(angle),
            &Resolution::for_degree(0),
        )
    }

    pub fn eta(&self) -> &RealCircleFunction {
        &self.eta
    }

    /// Minimum over the validation grid of `1 + d eta/d theta`.
    pub fn orientation_margin(&self) -> f64 {
        self.orientation_margin
    }

    /// The image `gamma(z) = z e^(i eta(z))` of a circle point.
    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        let eta = self.eta.eval(z)?;
        Ok(z * Complex64::new(0.0, eta.re).exp())
    }

    /// The strictly increasing lift `u(theta) = theta + eta(e^(i theta))`.
    pub fn lift(&self, theta: f64) -> f64 {
        theta + self.eta.eval_theta(theta)
    }
}

/// The local addition on the circle: `(z, r) -> z e^(ir)`.
pub fn local_addition(z: Complex64, r: f64) -> Result<Complex64> {
    let modulus = z.norm();
    if (modulus - 1.0).abs() > UNIT_MODULUS_TOL {
        return Err(Error::NotUnitModulus { modulus });
    }
    Ok(z * Complex64::from_polar(1.0, r))
}

/// Inverse of the local addition: the principal argument of `w/z`, defined
/// away from the antipodal set `w = -z`.
pub fn local_addition_inverse(z: Complex64, w: Complex64) -> Result<f64> {
    for point in [z, w] {
        let modulus = point.norm();
        if (modulus - 1.0).abs() > UNIT_MODULUS_TOL {
            return Err(Error::NotUnitModulus { modulus });
        }
    }
    let q = w / z;
    if (q + 1.0).norm() <= ANTIPODAL_TOL {
        return Err(Error::AntipodalPair);
    }
    Ok(q.arg())
}

/// Holomorphic extension of the inverse local addition to the punctured
/// plane: `(z, w) -> -i Log(w/z)` with the principal logarithm. Agrees with
/// `local_addition_inverse` on the circle.
pub fn complex_local_addition_inverse(z: Complex64, w: Complex64) -> Result<Complex64> {
    if (z.re == 0.0 && z.im == 0.0) || (w.re == 0.0 && w.im == 0.0) {
        return Err(Error::EvalAtZero);
    }
    let q = w / z;
    if q.im == 0.0 && q.re <= 0.0 {
        return Err(Error::LogBranchCut);
    }
    Ok(Complex64::new(0.0, -1.0) * q.ln())
}

/// Chart inverse: builds the diffeomorphism `z -> z e^(i eta(z))`, checking
/// that `eta` stays inside the chart and preserves orientation.
pub fn chart_out(eta: &RealCircleFunction, res: &Resolution) -> Result<CircleDiffeo> {
    res.validate()?;
    let len = res.samples.max(REALITY_GRID);
    let sup = eta.sup_on_grid(len);
    if sup >= PI {
        return Err(Error::ChartOverflow { sup });
    }
    let slope = eta.derivative_theta();
    let margin = angle_grid(len)
        .into_iter()
        .map(|theta| 1.0 + slope.eval_theta(theta))
        .fold(f64::INFINITY, f64::min);
    if margin <= 0.0 {
        return Err(Error::NotADiffeomorphism { margin });
    }
    Ok(CircleDiffeo {
        eta: eta.clone(),
        orientation_margin: margin,
    })
}

/// Chart map: recovers `eta` from the values of a diffeomorphism on the
/// uniform grid, `eta(z_j) = arg(gamma(z_j) / z_j)`.
pub fn chart_in(gamma_values: &[Complex64], degree: usize) -> Result<RealCircleFunction> {
    let grid = unit_circle_grid(gamma_values.len());
    let mut eta_values = Vec::with_capacity(gamma_values.len());
    for (&w, &z) in gamma_values.iter().zip(&grid) {
        eta_values.push(local_addition_inverse(z, w)?);
    }
    RealCircleFunction::fit_from_real_samples(&eta_values, degree)
}

/// The composition map read in the chart around the identity:
/// `mu(eta1, eta2) = eta1 o E(eta2)` with `E(eta)(z) = z e^(i eta(z))`,
/// computed by sampling and spectral refit.
pub fn mu(
    eta1: &RealCircleFunction,
    eta2: &RealCircleFunction,
    res: &Resolution,
) -> Result<RealCircleFunction> {
    // Both arguments must be admissible chart coordinates.
    chart_out(eta1, res)?;
    let inner = chart_out(eta2, res)?;
    let values = mu_pointwise(eta1, &inner, res)?;
    let result = RealCircleFunction::fit_from_real_samples(&values, res.degree)?;
    let sup = result.sup_on_grid(res.samples.max(REALITY_GRID));
    if sup >= PI {
        return Err(Error::ChartOverflow { sup });
    }
    Ok(result)
}

/// Raw samples `eta1(E(eta2)(z_j))` on the uniform grid, before any refit.
pub fn mu_pointwise(
    eta1: &RealCircleFunction,
    inner: &CircleDiffeo,
    res: &Resolution,
) -> Result<Vec<f64>> {
    let grid = unit_circle_grid(res.samples);
    let mut values = Vec::with_capacity(grid.len());
    for &z in &grid {
        let w = inner.apply(z)?;
        let v = eta1.eval(w)?;
        if v.im.abs() > REALITY_TOL {
            return Err(Error::NotRealOnCircle {
                max_imag: v.im.abs(),
            });
        }
        values.push(v.re);
    }
    Ok(values)
}

/// Group multiplication: the genuine composition `a o b`, sampled pointwise
/// and read back through the chart.
pub fn compose(a: &CircleDiffeo, b: &CircleDiffeo, res: &Resolution) -> Result<CircleDiffeo> {
    res.validate()?;
    let grid = unit_circle_grid(res.samples);
    let mut values = Vec::with_capacity(grid.len());
    for &z in &grid {
        values.push(a.apply(b.apply(z)?)?);
    }
    let eta = chart_in(&values, res.degree)?;
    chart_out(&eta, res)
}

/// Group inverse, by Newton iteration on the strictly increasing lift:
/// solves `u(v(theta)) = theta` with `u(t) = t + eta(e^(it))`.
pub fn invert(a: &CircleDiffeo, res: &Resolution) -> Result<CircleDiffeo> {
    res.validate()?;
    let eta = a.eta();
    let slope = eta.derivative_theta();
    let mut inverse_eta = Vec::with_capacity(res.samples);
    for theta in angle_grid(res.samples) {
        // u(v) - theta = 0, started at the first-order guess v = theta - eta.
        let mut v = theta - eta.eval_theta(theta);
        let mut residual = f64::INFINITY;
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITERS {
            let f = v + eta.eval_theta(v) - theta;
            residual = f.abs();
            if residual <= NEWTON_TOL {
                converged = true;
                break;
            }
            let df = 1.0 + slope.eval_theta(v);
            v -= f / df;
        }
        if !converged {
            return Err(Error::IllConditioned {
                iterations: NEWTON_MAX_ITERS,
                residual,
                tolerance: NEWTON_TOL,
            });
        }
        inverse_eta.push(v - theta);
    }
    let eta_inv = RealCircleFunction::fit_from_real_samples(&inverse_eta, res.degree)?;
    chart_out(&eta_inv, res)
}

// --- JSON wire format ------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DiffeoRepr {
    eta: LaurentSeries,
    orientation_margin: f64,
}

impl Serialize for CircleDiffeo {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DiffeoRepr {
            eta: self.eta.series().clone(),
            orientation_margin: self.orientation_margin,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CircleDiffeo {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = DiffeoRepr::deserialize(deserializer)?;
        let eta = RealCircleFunction::from_series(repr.eta).map_err(D::Error::custom)?;
        let sup = eta.sup_on_grid(REALITY_GRID);
        if sup >= PI {
            return Err(D::Error::custom(Error::ChartOverflow { sup }));
        }
        if repr.orientation_margin <= 0.0 {
            return Err(D::Error::custom(Error::NotADiffeomorphism {
                margin: repr.orientation_margin,
            }));
        }
        Ok(CircleDiffeo {
            eta,
            orientation_margin: repr.orientation_margin,
        })
    }
}
