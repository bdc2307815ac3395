//! Truncated two-sided (Laurent) series: evaluation, discrete Fourier
//! fitting on sampling circles, and certified supremum-norm bounds on the
//! annuli `U_n = { e^(-1/n) < |z| < e^(1/n) }` around the unit circle.
//!
//! Every other module is built on top of these primitives.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default truncation degree. Analytic germs on `U_n` have coefficients
/// decaying like `e^(-|k|/n)`, so 64 modes resolve the levels of interest
/// down to the double-precision floor.
pub const DEFAULT_DEGREE: usize = 64;

/// A Laurent polynomial `sum_{k=-K..K} c_k z^k`, stored densely.
///
/// Index `i` of the coefficient vector holds `k = i - K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries {
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl LaurentSeries {
    /// Builds a series from the full coefficient vector `c_{-K} .. c_K`.
    pub fn new(degree: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = 2 * degree + 1;
        if coeffs.len() != expected {
            return Err(Error::CoefficientLength {
                degree,
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self { degree, coeffs })
    }

    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * degree + 1],
        }
    }

    pub fn constant(value: Complex64) -> Self {
        Self {
            degree: 0,
            coeffs: vec![value],
        }
    }

    /// The monomial `c * z^k`.
    pub fn monomial(k: i64, c: Complex64) -> Self {
        let degree = k.unsigned_abs() as usize;
        let mut s = Self::zero(degree);
        s.set_coeff(k, c);
        s
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^k`; zero outside the stored range.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k + self.degree as i64;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub(crate) fn set_coeff(&mut self, k: i64, c: Complex64) {
        let idx = (k + self.degree as i64) as usize;
        self.coeffs[idx] = c;
    }

    /// Exponents paired with coefficients, `k = -K .. K`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let degree = self.degree as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - degree, c))
    }

    /// Two-sided Horner evaluation of the finite sum.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z.re == 0.0 && z.im == 0.0 {
            return Err(Error::EvalAtZero);
        }
        let k = self.degree;
        let mid = k;
        // Positive powers: z * (c_1 + z * (c_2 + ...))
        let mut pos = Complex64::new(0.0, 0.0);
        for i in (mid + 1..=2 * k).rev() {
            pos = pos * z + self.coeffs[i];
        }
        pos *= z;
        // Negative powers with w = 1/z.
        let w = z.finv();
        let mut neg = Complex64::new(0.0, 0.0);
        for i in 0..mid {
            neg = neg * w + self.coeffs[i];
        }
        neg *= w;
        Ok(self.coeffs[mid] + pos + neg)
    }

    /// Evaluation at `e^(i theta)` on the unit circle.
    pub fn eval_theta(&self, theta: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, theta);
        self.eval(z).expect("unit-circle point is nonzero")
    }

    /// `d/d theta` along circles centred at 0: `c_k -> i k c_k`.
    pub fn derivative_theta(&self) -> Self {
        let degree = self.degree;
        let coeffs = self
            .terms()
            .map(|(k, c)| Complex64::new(0.0, k as f64) * c)
            .collect();
        Self { degree, coeffs }
    }

    /// Complex derivative `d/dz`: `c_k z^k -> k c_k z^(k-1)`.
    ///
    /// The degree grows by one (the `z^-K` term maps to `z^(-K-1)`).
    pub fn derivative_z(&self) -> Self {
        let degree = self.degree + 1;
        let mut out = Self::zero(degree);
        for (k, c) in self.terms() {
            if k != 0 {
                out.set_coeff(k - 1, Complex64::new(k as f64, 0.0) * c);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let degree = self.degree.max(other.degree);
        let mut out = Self::zero(degree);
        for k in -(degree as i64)..=(degree as i64) {
            out.set_coeff(k, self.coeff(k) + other.coeff(k));
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Keeps `|k| <= degree`, returning the truncated series and the
    /// discarded coefficient mass `sum |c_k|`.
    pub fn truncate(&self, degree: usize) -> (Self, f64) {
        if degree >= self.degree {
            return (self.clone(), 0.0);
        }
        let mut out = Self::zero(degree);
        let mut tail = 0.0;
        for (k, c) in self.terms() {
            if k.unsigned_abs() as usize <= degree {
                out.set_coeff(k, c);
            } else {
                tail += c.norm();
            }
        }
        (out, tail)
    }

    /// Largest `|k|` carrying a coefficient with `|c_k| > floor`.
    pub fn effective_degree(&self, floor: f64) -> usize {
        self.terms()
            .filter(|(_, c)| c.norm() > floor)
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }
}

/// Recovers the degree-`K` series from samples on the circle `|z| = radius`.
///
/// `values[j]` must be the sample at `z_j = radius * e^(2 pi i j / N)` with
/// `N = values.len()`. Exact (to rounding) whenever the sampled function is a
/// Laurent polynomial of degree <= K and `N >= 2 (2K + 1)`.
pub fn fit_from_circle_samples(
    values: &[Complex64],
    radius: f64,
    degree: usize,
) -> Result<LaurentSeries> {
    let n = values.len();
    let required = 2 * (2 * degree + 1);
    if n < required {
        return Err(Error::InsufficientSamples {
            degree,
            required,
            got: n,
        });
    }
    // Twiddle table; indexing by (j*k) mod N keeps the DFT exactly periodic.
    let twiddle: Vec<Complex64> = (0..n)
        .map(|m| Complex64::from_polar(1.0, -TAU * m as f64 / n as f64))
        .collect();
    let mut coeffs = Vec::with_capacity(2 * degree + 1);
    for k in -(degree as i64)..=(degree as i64) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            let m = ((j as i64 * k).rem_euclid(n as i64)) as usize;
            acc += v * twiddle[m];
        }
        let scale = radius.powi(-(k as i32));
        coeffs.push(acc * scale / n as f64);
    }
    LaurentSeries::new(degree, coeffs)
}

/// The uniform sampling grid `z_j = e^(2 pi i j / len)` on the unit circle.
pub fn unit_circle_grid(len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / len as f64))
        .collect()
}

/// Uniform angles `theta_j = 2 pi j / len`.
pub fn angle_grid(len: usize) -> Vec<f64> {
    (0..len).map(|j| TAU * j as f64 / len as f64).collect()
}

/// Index `n` of the annulus `U_n = { e^(-1/n) < |z| < e^(1/n) }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnnulusLevel(u32);

impl AnnulusLevel {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLevel);
        }
        Ok(Self(n))
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// Inner radius `e^(-1/n)`.
    pub fn inner(self) -> f64 {
        (-1.0 / self.0 as f64).exp()
    }

    /// Outer radius `e^(1/n)`.
    pub fn outer(self) -> f64 {
        (1.0 / self.0 as f64).exp()
    }

    /// The weight `e^(|k|/n)` of the mode `z^k` in the coefficient norm.
    pub fn weight(self, k: i64) -> f64 {
        (k.unsigned_abs() as f64 / self.0 as f64).exp()
    }

    /// Half of `outer - inner`; the largest admissible Cauchy shrink.
    pub fn half_width(self) -> f64 {
        0.5 * (self.outer() - self.inner())
    }
}

impl std::fmt::Display for AnnulusLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "U_{}", self.0)
    }
}

/// A series certified as an element of the Banach step `BHol(U_n, C)`,
/// carrying a two-sided enclosure of its supremum norm.
///
/// `norm_upper = sum |c_k| e^(|k|/n)` is a certified upper bound;
/// `norm_lower` is the maximum of `|eval|` over a grid on the circles
/// `|z| = e^(-1/n), 1, e^(1/n)`, hence a lower bound on the true sup.
#[derive(Debug, Clone)]
pub struct BanachGerm {
    series: LaurentSeries,
    level: AnnulusLevel,
    norm_upper: f64,
    norm_lower: f64,
}

impl BanachGerm {
    pub fn series(&self) -> &LaurentSeries {
        &self.series
    }

    pub fn level(&self) -> AnnulusLevel {
        self.level
    }

    pub fn norm_upper(&self) -> f64 {
        self.norm_upper
    }

    pub fn norm_lower(&self) -> f64 {
        self.norm_lower
    }
}

/// Number of grid points per circle used for the norm lower bound.
fn norm_grid_len(degree: usize) -> usize {
    (4 * (2 * degree + 1)).max(16)
}

/// Certifies a series at a level, computing both norm bounds.
pub fn supnorm(series: &LaurentSeries, level: AnnulusLevel) -> BanachGerm {
    let norm_upper: f64 = series
        .terms()
        .map(|(k, c)| c.norm() * level.weight(k))
        .sum();
    let len = norm_grid_len(series.degree());
    let mut norm_lower: f64 = 0.0;
    for radius in [level.inner(), 1.0, level.outer()] {
        for j in 0..len {
            let z = Complex64::from_polar(radius, TAU * j as f64 / len as f64);
            let v = series.eval(z).expect("grid point is nonzero").norm();
            if v > norm_lower {
                norm_lower = v;
            }
        }
    }
    BanachGerm {
        series: series.clone(),
        level,
        norm_upper,
        norm_lower,
    }
}

/// Cauchy estimate: on the sub-annulus of `U_n` at distance `r` from the
/// boundary, `sup |g'| <= norm_upper / r`.
pub fn cauchy_derivative_bound(germ: &BanachGerm, r: f64) -> Result<f64> {
    let max = germ.level().half_width();
    if !(r > 0.0 && r < max) {
        return Err(Error::ShrinkRadius { radius: r, max });
    }
    Ok(germ.norm_upper() / r)
}

// --- JSON wire format ------------------------------------------------------
//
// {"degree": K, "coeffs": [[re, im], ...]} with coeffs ordered k = -K .. K.

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    degree: usize,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for LaurentSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesRepr {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LaurentSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SeriesRepr::deserialize(deserializer)?;
        let coeffs = repr
            .coeffs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        LaurentSeries::new(repr.degree, coeffs).map_err(D::Error::custom)
    }
}
