//! Spectral computations in the group `Diff^omega(S^1)` of real-analytic
//! circle diffeomorphisms.
//!
//! The crate represents analytic functions on the circle as truncated
//! Laurent series, certifies them on the annulus hierarchy
//! `U_n = { e^(-1/n) < |z| < e^(1/n) }` whose Banach steps assemble the
//! Silva model space, and builds on that substrate:
//!
//! - [`laurent`]: series arithmetic, circle-grid fitting, norm enclosures;
//! - [`silva`]: restriction maps between levels and their compactness
//!   diagnostics, plus level assignment from coefficient decay;
//! - [`diffeo`]: the chart around the identity, the composition map, and
//!   the group operations (compose, invert) via sample-and-refit;
//! - [`flow`]: time-dependent vector fields, RK4 flows, the evolution and
//!   exponential maps, Lie bracket, ball certificates, Lipschitz probing;
//! - [`obstruction`]: the pole construction showing the group
//!   multiplication admits no complex-analytic extension near the identity.
//!
//! ```
//! use diffw_core::diffeo::{compose, invert, Resolution};
//! use diffw_core::flow::exp;
//! use diffw_core::RealCircleFunction;
//!
//! let res = Resolution::for_degree(32);
//! // exp of the constant field is the rigid rotation by that angle.
//! let rot = exp(&RealCircleFunction::constant(0.2), 1e-2, &res).unwrap();
//! let inv = invert(&rot, &res).unwrap();
//! let id = compose(&rot, &inv, &res).unwrap();
//! assert!(id.eta().sup_on_grid(256) < 1e-8);
//! ```

pub mod diffeo;
pub mod error;
pub mod flow;
pub mod laurent;
pub mod obstruction;
pub mod rng;
pub mod silva;

pub use diffeo::{CircleDiffeo, RealCircleFunction, Resolution};
pub use error::{Error, Result};
pub use flow::{BallCertificate, FlowTrajectory, Interpolation, TimeDependentField};
pub use laurent::{AnnulusLevel, BanachGerm, LaurentSeries};
pub use obstruction::{ObstructionReport, PoleObstruction};
pub use silva::{LevelAssignment, LevelOutcome};
