//! Shared input builders for the benchmarks.

use diffw_core::diffeo::RealCircleFunction;
use diffw_core::laurent::LaurentSeries;
use diffw_core::rng::SplitMix64;
use num_complex::Complex64;

pub use num_complex;

/// Random Hermitian angle field with decaying spectrum, sup about `sup`,
/// slope capped at 0.5.
pub fn sample_eta(seed: u64, degree: usize, sup: f64) -> RealCircleFunction {
    let mut rng = SplitMix64::new(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * degree + 1];
    coeffs[degree] = Complex64::new(rng.next_in(-1.0, 1.0), 0.0);
    for k in 1..=degree {
        let damp = (-(k as f64) / 2.0).exp();
        let c = Complex64::new(rng.next_in(-1.0, 1.0), rng.next_in(-1.0, 1.0)) * damp;
        coeffs[degree + k] = c;
        coeffs[degree - k] = c.conj();
    }
    let series = LaurentSeries::new(degree, coeffs).unwrap();
    let f = RealCircleFunction::from_series(series).unwrap();
    let len = 4 * (2 * degree + 1) + 1;
    let current = f.sup_on_grid(len);
    let slope = f.derivative_theta().sup_on_grid(len);
    f.scale((sup / current.max(1e-300)).min(0.5 / slope.max(1e-300)))
}
