//! Solvers for monotone saddle point problems behind a common trace
//! interface.
//!
//! [`run`] drives the adaptive second-order optimistic method (both the
//! fixed-λ and the parameter-free step-size options). [`run_extragradient`],
//! [`run_ogda`], and [`run_linesearch_som`] provide the classical first-order
//! and line-search second-order baselines. Every run produces a [`RunTrace`]
//! with per-iteration telemetry and optional invariant flags; [`audit_trace`]
//! replays the recorded inequalities after the fact.

mod audit;
mod baselines;
mod som;
mod trace;

pub use audit::{audit_trace, Violation};
pub use baselines::{
    default_baseline_gamma, extragradient_step, linesearch_som_step, ogda_step, run_extragradient,
    run_linesearch_som, run_ogda, LinesearchConfig,
};
pub use som::{
    adaptive_som_step, eta_option1, eta_option2, lambda_option2, prediction_error, run, StepOutcome,
};
pub use trace::{InvariantFlags, IterationRecord, RunTrace, SolverSettings, TerminationReason};

use thiserror::Error;

use crate::core::CoreError;

/// Errors surfaced by solver runs.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Core(#[from] CoreError),
    /// `‖F(z_t)‖ = 0`: the iterate already solves the problem, so the
    /// step-size quadratic is undefined. The run loop terminates before
    /// stepping in this situation.
    #[error("operator norm is zero at the current iterate")]
    ZeroOperatorNorm,
    #[error("line search failed to satisfy the error condition after {backtracks} reductions")]
    LineSearchFailed { backtracks: u32 },
}
