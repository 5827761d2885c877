//! Convergence metrics, theorem-constant evaluators, and the restricted-gap
//! surrogate.

mod bounds;
mod gap;
mod series;

pub use bounds::{
    effective_l1, gap_reports, thm61_gap_bound, thm61_norm_bound, thm61_reports, thm62_norm_bound,
    thm62_reports, BoundKind, BoundReport,
};
pub use gap::{gap_surrogate, gap_surrogate_prefix, GapProbeSet};
pub use series::{implicit_bound_check, opnorm_ratio, rate_slope, ImplicitBoundCheck};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("trace has no weighted steps")]
    EmptyTrace,
    #[error("the problem has no known solution to measure against")]
    MissingSolution,
    #[error("rate window needs {needed} positive points, found {got}")]
    DegenerateWindow { needed: usize, got: usize },
    #[error("report does not apply to this solver's trace")]
    WrongSolver,
}
