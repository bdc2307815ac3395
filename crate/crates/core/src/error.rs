//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by series arithmetic, chart operations, flows and the
/// obstruction pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("evaluation at z = 0: negative powers are undefined")]
    EvalAtZero,

    #[error("coefficient vector has length {got}, expected {expected} for degree {degree}")]
    CoefficientLength {
        degree: usize,
        expected: usize,
        got: usize,
    },

    #[error("{got} samples are not enough: fitting degree {degree} needs at least {required}")]
    InsufficientSamples {
        degree: usize,
        required: usize,
        got: usize,
    },

    #[error("annulus level index must be >= 1")]
    InvalidLevel,

    #[error("shrink radius {radius} outside (0, {max}) for this annulus")]
    ShrinkRadius { radius: f64, max: f64 },

    #[error(
        "cannot restrict from level {from} to coarser level {to}: restriction only shrinks domains"
    )]
    RestrictionWidens { from: u32, to: u32 },

    #[error("the zero series belongs to every level; assignment is meaningless")]
    ZeroSeries,

    #[error("|z| = {modulus} is not unit modulus")]
    NotUnitModulus { modulus: f64 },

    #[error("antipodal pair (w = -z): outside the chart domain")]
    AntipodalPair,

    #[error("w/z lies on the closed negative real axis: principal logarithm undefined")]
    LogBranchCut,

    #[error("series is not Hermitian-symmetric: max |c_-k - conj(c_k)| = {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },

    #[error("function is not real on the circle: max |Im| = {max_imag:.3e} on the grid")]
    NotRealOnCircle { max_imag: f64 },

    #[error("sup |eta| = {sup:.6} >= pi: leaves the chart around the identity")]
    ChartOverflow { sup: f64 },

    #[error("orientation margin {margin:.3e} <= 0: lift is not strictly increasing")]
    NotADiffeomorphism { margin: f64 },

    #[error("Newton iteration on the lift did not reach residual {tolerance:.1e} in {iterations} steps (residual {residual:.3e})")]
    IllConditioned {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("invalid knot sequence: {reason}")]
    InvalidKnots { reason: String },

    #[error("step size {step} outside (0, {max}]")]
    InvalidStep { step: f64, max: f64 },

    #[error("non-finite value during integration at t = {t}")]
    NumericalFailure { t: f64 },

    #[error("trajectory needs at least {required} states, got {got}")]
    TrajectoryTooShort { required: usize, got: usize },

    #[error("field is not certified at level {level}: sup bound {sup_bound:.6} >= {radius:.6}")]
    NotCertified {
        level: u32,
        sup_bound: f64,
        radius: f64,
    },

    #[error("evaluation at a pole (or at 0) of the obstruction function")]
    PoleHit,

    #[error("|z| = {modulus:.6} outside the open disc of radius {radius:.6}")]
    OutOfDisc { modulus: f64, radius: f64 },

    #[error(
        "annulus level {level} does not avoid the poles at e^(+-{pole_exponent}): need 1/n < R"
    )]
    LevelMeetsPole { level: u32, pole_exponent: f64 },

    #[error("unstable radius estimate: {detail}")]
    UnstableEstimate { detail: String },

    #[error("degree {degree} too small: {reason}")]
    DegreeTooSmall { degree: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
