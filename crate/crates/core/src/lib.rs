//! Theta-scheme finite differences for the viscous Burgers equation on `[0, 1]`
//! with nonlinear Neumann boundary feedback.
//!
//! The solver works on the shifted variable `w = y - w_d`, so the controlled
//! solution is driven towards zero. Everything numerical is generic over
//! [`Real`]; the aliases at the crate root fix the scalar to `f64`, which is
//! what the experiment harness and the CLI use.

// `!(a > b)` is used on purpose so that NaN fails the check; a run failure
// carries its partial trajectory by value.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::result_large_err,
    clippy::needless_range_loop
)]

pub mod analysis;
pub mod consistency;
pub mod error;
pub mod grid;
pub mod operators;
pub mod reference;
pub mod scalar;
pub mod stability;
pub mod stepper;
pub mod tridiag;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GridSpec = grid::GridSpec<f64>;
pub type ModelParams = grid::ModelParams<f64>;
pub type StateField = grid::StateField<f64>;
pub type InitialCondition = grid::InitialCondition<f64>;
pub type NormReport = operators::NormReport<f64>;
pub type BoundaryMode = stepper::BoundaryMode<f64>;
pub type Scheme = stepper::Scheme<f64>;
pub type RunTrajectory = stepper::RunTrajectory<f64>;
pub type LevelRecord = stepper::LevelRecord<f64>;
pub type NewtonConfig = stepper::NewtonConfig<f64>;
pub type NewtonStats = stepper::NewtonStats<f64>;
pub type StabilityBounds = stability::StabilityBounds<f64>;
pub type DecayFit = stability::DecayFit<f64>;
pub type ConvergenceRow = analysis::ConvergenceRow<f64>;
pub type ControllerRow = analysis::ControllerRow<f64>;
pub type StudyPlan = analysis::StudyPlan<f64>;
pub type StudyReport = analysis::StudyReport<f64>;

/// Single-precision variants, mostly useful for quick exploratory runs.
pub mod f32 {
    pub type GridSpec = crate::grid::GridSpec<f32>;
    pub type ModelParams = crate::grid::ModelParams<f32>;
    pub type StateField = crate::grid::StateField<f32>;
    pub type Scheme = crate::stepper::Scheme<f32>;
    pub type RunTrajectory = crate::stepper::RunTrajectory<f32>;
}
