//! Numerical oracles for validating problem definitions.

use nalgebra::DMatrix;

use super::{Point, SaddleProblem};

/// Central-difference approximation of the Jacobian `F'(z)`:
/// column `j` is `(F(z + h·eⱼ) − F(z − h·eⱼ)) / 2h`.
///
/// This is the verification oracle for `jacobian_eval`; it deliberately goes
/// through `eval_operator` only.
pub fn fd_jacobian(problem: &SaddleProblem, z: &Point, h: f64) -> DMatrix<f64> {
    assert!(h > 0.0, "finite-difference step must be positive");
    let d = z.dim();
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut forward = z.values().clone();
        forward[j] += h;
        let mut backward = z.values().clone();
        backward[j] -= h;
        let fp = problem.eval_operator(&z.with_values(forward));
        let fm = problem.eval_operator(&z.with_values(backward));
        let col = (fp - fm) / (2.0 * h);
        out.set_column(j, &col);
    }
    out
}

/// [`fd_jacobian`] with the default step `h = 1e−5·(1 + ‖z‖)`, the
/// central-difference sweet spot in double precision.
pub fn fd_jacobian_auto(problem: &SaddleProblem, z: &Point) -> DMatrix<f64> {
    fd_jacobian(problem, z, 1e-5 * (1.0 + z.norm()))
}

/// Monotonicity probe `⟨F(z₁) − F(z₂), z₁ − z₂⟩`.
///
/// For any convex-concave instance this is ≥ 0 up to rounding; test suites
/// assert `≥ −1e−9·(1 + ‖z₁ − z₂‖²)`.
pub fn monotonicity_probe(problem: &SaddleProblem, z1: &Point, z2: &Point) -> f64 {
    assert_eq!(z1.dim(), z2.dim(), "probe points must share dimensions");
    let df = problem.eval_operator(z1) - problem.eval_operator(z2);
    let dz = z1.values() - z2.values();
    df.dot(&dz)
}
