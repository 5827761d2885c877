//! Domain types and the numerical kernel shared by every solver.
//!
//! A [`Point`] is a flat vector over the concatenated variable `z = (x, y)`
//! with a recorded split index; a [`SaddleProblem`] bundles the operator
//! `F(z)`, its Jacobian `F'(z)`, and smoothness constants. The regularized
//! solve `(λI + ηF'(z))w = rhs` in [`linalg`] is the single linear-algebra
//! primitive the second-order updates need, and [`oracles`] provides the
//! independent checks (finite differences, monotonicity) that validate
//! problem definitions.

mod config;
pub mod linalg;
pub mod oracles;
mod point;
mod problem;

pub use config::{SolverConfig, SolverState, SomOption};
pub use linalg::solve_regularized_system;
pub use oracles::{fd_jacobian, fd_jacobian_auto, monotonicity_probe};
pub use point::Point;
pub use problem::SaddleProblem;

use thiserror::Error;

/// Errors from domain-type construction and the linear-algebra kernel.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The shifted system could not be solved to tolerance. Under
    /// monotonicity the matrix is provably nonsingular, so this signals a
    /// non-monotone operator or numerical breakdown.
    #[error("singular system: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    SingularSystem { residual: f64, tolerance: f64 },
}
