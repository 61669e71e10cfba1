//! Simulation of the radial defocusing nonlinear wave equation
//!
//! ```text
//! u_tt = u_rr + (d-1)/r u_r - mu |u|^p u,   u_r(t, 0) = 0,   u(t, R_max) = 0
//! ```
//!
//! with an explicit three-level finite-difference scheme, together with the
//! diagnostics used to judge scattering: critical Sobolev and Besov norms,
//! Lebesgue-norm decay and discrete energy drift.

pub mod config;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod expr;
pub mod grid;
pub mod initial;
pub mod output;
pub mod solver;
pub mod spectral;
pub mod svg;

pub use config::{
    critical_exponent, load_config, stability_limit, CaseId, CriticalExponents, RawConfig,
    SimulationConfig,
};
pub use error::{Error, Result};
pub use grid::{linf_of_field, sample, RadialField, RadialGrid, SolverState};
pub use initial::{incoming_velocity, make_case, CaseSpec, RadialFn};
pub use solver::{first_step, run, step, FirstStepMode, StencilCoefficients};
