//! Solvers and benchmarks for smooth convex-concave min-max problems.
//!
//! The crate is organized around the monotone-operator view of the saddle
//! point problem `min_x max_y f(x, y)`: a problem is a pair of evaluators for
//! the stacked operator `F(z) = [∇_x f; -∇_y f]` and its Jacobian, and a
//! solver is an iteration on the concatenated variable `z = (x, y)`.
//!
//! - [`core`] — domain types ([`core::Point`], [`core::SaddleProblem`]), the
//!   regularized linear solve used by the second-order updates, and numerical
//!   oracles (finite-difference Jacobian, monotonicity probe).
//! - [`problems`] — seeded test instances: the cubic-regularized bilinear
//!   benchmark, plain bilinear games, and convex-concave quadratics with
//!   closed-form solutions.
//! - [`solvers`] — the adaptive second-order optimistic method (fixed-λ and
//!   parameter-free variants), plus extragradient, optimistic gradient, and
//!   line-search second-order baselines, all producing [`solvers::RunTrace`]
//!   telemetry.
//! - [`metrics`] — convergence-rate bound evaluators, the restricted-gap
//!   surrogate, and empirical rate-slope estimation.

pub mod core;
pub mod metrics;
pub mod problems;
pub mod solvers;

pub use crate::core::{CoreError, Point, SaddleProblem, SolverConfig, SolverState, SomOption};
