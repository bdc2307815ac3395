//! The Silva-space level structure over the annulus hierarchy: restriction
//! (bonding) maps between Banach steps, the closed-form norm decay that
//! witnesses their compactness, and a decay-rate certificate placing a
//! truncated series at its smallest certifiable level.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laurent::{supnorm, AnnulusLevel, BanachGerm, LaurentSeries};

/// Deepest level the assignment search will consider. 1/64-wide annuli are
/// below what a degree-64 truncation can resolve in double precision.
pub const LEVEL_CAP: u32 = 64;

/// Relative floor under which a coefficient is treated as numerically zero.
const COEFF_FLOOR: f64 = 1e-250;

/// A series certified to lie in the Banach step `E_n^b`, together with the
/// decay margin backing the certificate.
#[derive(Debug, Clone)]
pub struct LevelAssignment {
    pub germ: BanachGerm,
    pub certified_level: u32,
    pub decay_margin: f64,
}

/// Result of the level search: either a certificate or an explicit refusal.
#[derive(Debug, Clone)]
pub enum LevelOutcome {
    Certified(LevelAssignment),
    /// No level up to `cap` certifies the series; `best_rate` is the measured
    /// tail decay rate that fell short.
    NoLevel {
        cap: u32,
        best_rate: f64,
    },
}

/// The bonding map `E_n^b -> E_m^b`, `f -> f|_{U_m}` for `m >= n`:
/// identical coefficients, norms recomputed over the smaller annulus.
pub fn restrict(germ: &BanachGerm, target: AnnulusLevel) -> Result<BanachGerm> {
    let from = germ.level().index();
    let to = target.index();
    if to < from {
        return Err(Error::RestrictionWidens { from, to });
    }
    Ok(supnorm(germ.series(), target))
}

/// Norm decay `||z^k||_{n+1} / ||z^k||_n = e^(-|k| / (n (n+1)))` of the
/// bonding map on the monomial basis — the numerical witness that the
/// bonding operators are compact.
pub fn compactness_ratio(k: i64, n: u32) -> f64 {
    let n = n as f64;
    (-(k.unsigned_abs() as f64) / (n * (n + 1.0))).exp()
}

/// The same ratio measured from grid suprema rather than the closed form.
pub fn measured_compactness_ratio(k: i64, n: u32) -> Result<f64> {
    let series = LaurentSeries::monomial(k, Complex64::new(1.0, 0.0));
    let coarse = supnorm(&series, AnnulusLevel::new(n)?);
    let fine = supnorm(&series, AnnulusLevel::new(n + 1)?);
    Ok(fine.norm_lower() / coarse.norm_lower())
}

/// Measured decay rate of the tail: the best `rho` such that
/// `|c_k| <= c_max e^(-rho |k|)` over the significant tail `|k| > K/2`.
///
/// Returns `None` when the tail is numerically empty (the series is, at the
/// stored resolution, a finite Laurent polynomial).
fn tail_decay_rate(series: &LaurentSeries) -> Option<f64> {
    let c_max = series
        .coeffs()
        .iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max);
    let half = series.degree() / 2;
    let mut rate: Option<f64> = None;
    for (k, c) in series.terms() {
        let depth = k.unsigned_abs() as usize;
        if depth <= half {
            continue;
        }
        let magnitude = c.norm();
        if magnitude <= c_max * COEFF_FLOOR {
            continue;
        }
        let r = (c_max.ln() - magnitude.ln()) / depth as f64;
        rate = Some(match rate {
            Some(best) => best.min(r),
            None => r,
        });
    }
    rate
}

/// Finds the smallest level `n <= LEVEL_CAP` whose tail-decay certificate
/// holds with margin at least `tolerance`.
///
/// A coefficient tail decaying like `e^(-rho |k|)` is the signature of a
/// germ bounded on every annulus `U_n` with `1/n < rho`; the margin is
/// `rho - 1/n`. A series whose significant support stops by `K/2` carries
/// no decay obstruction at all and is certified at level 1.
pub fn assign_level(series: &LaurentSeries, tolerance: f64) -> Result<LevelOutcome> {
    if series.is_zero() {
        return Err(Error::ZeroSeries);
    }
    let rate = match tail_decay_rate(series) {
        // Finite series lie in every level.
        None => {
            let level = AnnulusLevel::new(1)?;
            return Ok(LevelOutcome::Certified(LevelAssignment {
                germ: supnorm(series, level),
                certified_level: 1,
                decay_margin: f64::INFINITY,
            }));
        }
        Some(rate) => rate,
    };
    for n in 1..=LEVEL_CAP {
        let margin = rate - 1.0 / n as f64;
        if margin >= tolerance && margin > 0.0 {
            let level = AnnulusLevel::new(n)?;
            return Ok(LevelOutcome::Certified(LevelAssignment {
                germ: supnorm(series, level),
                certified_level: n,
                decay_margin: margin,
            }));
        }
    }
    Ok(LevelOutcome::NoLevel {
        cap: LEVEL_CAP,
        best_rate: rate,
    })
}
