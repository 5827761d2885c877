//! Dense linear algebra for the second-order updates.
//!
//! The only solve the optimistic methods need is the shifted system
//! `(λI + ηJ)w = rhs` with `λ > 0`, `η ≥ 0`, and `J` the Jacobian of a
//! monotone operator. Monotonicity makes `⟨Jv, v⟩ ≥ 0` for all `v`, so the
//! symmetric part of the matrix is at least `λI` and the system is
//! nonsingular; a direct LU factorization with a residual check is exact
//! enough at the dimensions this crate targets.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::CoreError;

/// Solution of a shifted system together with its verified residual.
#[derive(Debug, Clone)]
pub struct ShiftedSolve {
    pub w: DVector<f64>,
    pub residual: f64,
    pub tolerance: f64,
}

/// Solves `(λI + ηJ)w = rhs` by dense LU with partial pivoting.
///
/// The returned `w` satisfies the residual bound
/// `‖(λI + ηJ)w − rhs‖ ≤ 1e−10·(λ + η‖J‖_F)·‖w‖ + 1e−12`; a violation (or a
/// failed factorization) is reported as [`CoreError::SingularSystem`], which
/// under the monotonicity assumption indicates a non-monotone input or
/// numerical breakdown.
pub fn solve_regularized_system(
    lambda: f64,
    eta: f64,
    jacobian: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> Result<DVector<f64>, CoreError> {
    shifted_solve(lambda, eta, jacobian, rhs).map(|s| s.w)
}

/// [`solve_regularized_system`] keeping the residual and its tolerance for
/// telemetry.
pub fn shifted_solve(
    lambda: f64,
    eta: f64,
    jacobian: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> Result<ShiftedSolve, CoreError> {
    let d = rhs.len();
    if jacobian.nrows() != d || jacobian.ncols() != d {
        return Err(CoreError::DimensionMismatch(format!(
            "jacobian is {}x{}, rhs has length {}",
            jacobian.nrows(),
            jacobian.ncols(),
            d
        )));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CoreError::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(CoreError::InvalidParameter(format!(
            "eta must be finite and >= 0, got {eta}"
        )));
    }

    let mut system = jacobian * eta;
    for i in 0..d {
        system[(i, i)] += lambda;
    }

    let lu = system.clone().lu();
    let w = lu.solve(rhs).ok_or(CoreError::SingularSystem {
        residual: f64::INFINITY,
        tolerance: 0.0,
    })?;

    let residual = (&system * &w - rhs).norm();
    let tolerance = solve_residual_tolerance(lambda, eta, jacobian.norm(), w.norm());
    if residual > tolerance || residual.is_nan() {
        return Err(CoreError::SingularSystem {
            residual,
            tolerance,
        });
    }
    Ok(ShiftedSolve {
        w,
        residual,
        tolerance,
    })
}

/// Residual tolerance the solve enforces, exposed so telemetry can record
/// how close each iteration came to it.
pub fn solve_residual_tolerance(lambda: f64, eta: f64, jacobian_fro: f64, w_norm: f64) -> f64 {
    1e-10 * (lambda + eta * jacobian_fro) * w_norm + 1e-12
}

/// Estimates the spectral norm `‖M‖₂` by power iteration on `MᵀM`.
///
/// Deterministic: the start vector comes from a fixed-seed generator. Used
/// for baseline step-size calibration and as an independent oracle for
/// instance Lipschitz constants.
pub fn spectral_norm_power(matrix: &DMatrix<f64>, iters: usize) -> f64 {
    let n = matrix.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(0x51c7_0a11);
    let mut v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let mut norm = v.norm();
    if norm == 0.0 {
        v[0] = 1.0;
        norm = 1.0;
    }
    v /= norm;
    let mut sigma = 0.0;
    for _ in 0..iters {
        let mv = matrix * &v;
        let mtmv = matrix.transpose() * mv;
        let len = mtmv.norm();
        if len == 0.0 {
            return 0.0;
        }
        sigma = len.sqrt();
        v = mtmv / len;
    }
    sigma
}
