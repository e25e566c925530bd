//! Radial ground states of the focusing, L^2-supercritical nonlinear
//! Schrödinger equation with an inverse-square potential
//!
//! ```text
//! i u_t + Delta u + c |x|^{-2} u = -|u|^alpha u,   x in R^d,
//! ```
//!
//! and numerical certification of their strong instability: ground states are
//! computed by Nehari-constrained minimisation (cross-checked by shooting),
//! dilated initial data are evolved by a conservative Crank–Nicolson scheme,
//! and finite-time blow-up is certified through localized virial concavity.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod experiment;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod ground_state;
pub mod operator;
pub mod params;
pub mod tridiag;
pub mod virial;

pub use error::{Error, Result};
pub use evolution::{BlowupReason, BlowupVerdict, EvolutionControls, Scheme, Trajectory};
pub use experiment::{parse_config, run_experiment, Config, ExperimentFailure, ExperimentKind, ExperimentResult};
pub use field::{scale_field, ComplexRadialField, RealRadialField};
pub use functionals::{functional_report, FunctionalReport};
pub use grid::{GridSpec, RadialGrid};
pub use ground_state::{solve_ground_state, GroundState, Method, SolveOptions};
pub use num_complex::Complex64;
pub use params::Params;
