//! Seeded test instances with closed-form solutions where available.
//!
//! All instances are deterministic functions of their dimensions, scale
//! parameters, and seed, and serialize to JSON (matrices row-major) for
//! archival and cross-run comparison.

mod benchmark;
mod random;
mod synthetic;
mod wire;

pub use benchmark::{known_solution, make_benchmark, BenchmarkInstance};
pub use random::{random_orthogonal, spectrum_matrix, RNG_NAME};
pub use synthetic::{make_bilinear, make_quadratic, BilinearInstance, QuadraticInstance};
pub use wire::MatrixWire;

pub(crate) use random::{gaussian_vector, rng_for};

use thiserror::Error;

use crate::core::CoreError;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("known solution residual {residual:.3e} exceeds bound {bound:.3e}")]
    SolutionResidual { residual: f64, bound: f64 },
    #[error("serialization failed: {0}")]
    Serde(#[from] serde_json::Error),
}

/// Standard-normal initial iterate in `ℝ^{m+n}`, drawn from a dedicated
/// stream of the given seed so it is independent of instance generation.
pub fn random_initial_point(dim_x: usize, dim_y: usize, seed: u64) -> crate::core::Point {
    let values = gaussian_vector(&mut rng_for(seed, 7), dim_x + dim_y);
    crate::core::Point::new(values, dim_x).expect("gaussian draw is finite")
}
