//! The cubic-regularized bilinear benchmark
//! `f(x, y) = (Ax − b)ᵀy + (L₂/6)‖x‖³` on `x, y ∈ ℝⁿ`.
//!
//! The coupling matrix is `A = Uᵀ S V` with seeded Haar-orthogonal `U, V`
//! and the diagonal spectrum `S_ii = 20^{−i/n}`, and `b` is standard normal.
//! The stacked operator and Jacobian are
//!
//! ```text
//! F(z)  = [Aᵀy + (L₂/2)‖x‖x ; −(Ax − b)]
//! F'(z) = [[(L₂/2)(‖x‖I + xxᵀ/‖x‖), Aᵀ], [−A, 0]]
//! ```
//!
//! with the curvature block defined as zero at `x = 0` (its limit). The
//! Hessian of the cubic term is exactly `L₂`-Lipschitz, so the instance
//! satisfies the second-order smoothness assumption with constant `L₂`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::core::{Point, SaddleProblem};

use super::random::{gaussian_vector, orthogonal_from_rng, rng_for, spectrum_matrix};
use super::wire::MatrixWire;
use super::ProblemError;

/// A generated benchmark instance: the coupling matrix, right-hand side,
/// cubic scale, and the seed that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkInstance {
    a: DMatrix<f64>,
    b: DVector<f64>,
    l2: f64,
    seed: u64,
}

impl BenchmarkInstance {
    /// Generates the instance for block dimension `n` (so `z ∈ ℝ^{2n}`).
    pub fn generate(n: usize, l2: f64, seed: u64) -> Self {
        assert!(n >= 1, "benchmark needs n >= 1");
        assert!(l2 > 0.0, "benchmark needs L2 > 0");
        let u = orthogonal_from_rng(&mut rng_for(seed, 1), n);
        let v = orthogonal_from_rng(&mut rng_for(seed, 2), n);
        let s = spectrum_matrix(n);
        let a = u.transpose() * s * v;
        let b = gaussian_vector(&mut rng_for(seed, 3), n);
        Self { a, b, l2, seed }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Closed-form solution of `F(z) = 0`: `x* = A⁻¹b` and
    /// `y* = −(L₂/2)‖x*‖ A⁻ᵀ x*`.
    pub fn known_solution(&self) -> Result<Point, ProblemError> {
        let n = self.n();
        let lu = self.a.clone().lu();
        let x_star = lu
            .solve(&self.b)
            .ok_or_else(|| ProblemError::Singular("benchmark matrix A".into()))?;
        let at_lu = self.a.transpose().lu();
        let y_star = -(self.l2 / 2.0)
            * x_star.norm()
            * at_lu
                .solve(&x_star)
                .ok_or_else(|| ProblemError::Singular("benchmark matrix Aᵀ".into()))?;
        let mut values = DVector::zeros(2 * n);
        values.rows_mut(0, n).copy_from(&x_star);
        values.rows_mut(n, n).copy_from(&y_star);
        let z_star = Point::new(values, n)?;

        let residual = self.to_problem_unchecked().operator_norm_at(&z_star);
        let bound = 1e-9 * (1.0 + self.b.norm());
        if residual > bound {
            return Err(ProblemError::SolutionResidual { residual, bound });
        }
        Ok(z_star)
    }

    /// Builds the evaluator bundle, attaching the closed-form solution.
    pub fn to_problem(&self) -> Result<SaddleProblem, ProblemError> {
        let z_star = self.known_solution()?;
        Ok(self.to_problem_unchecked().with_known_solution(z_star))
    }

    fn to_problem_unchecked(&self) -> SaddleProblem {
        let n = self.n();
        let data = Arc::new((self.a.clone(), self.b.clone(), self.l2));
        let op_data = Arc::clone(&data);
        let operator = move |z: &Point| {
            let (a, b, l2) = op_data.as_ref();
            let x = z.x();
            let y = z.y();
            let mut out = DVector::zeros(2 * n);
            let mut top = a.transpose() * y;
            top.axpy(l2 / 2.0 * x.norm(), &x, 1.0);
            out.rows_mut(0, n).copy_from(&top);
            let bottom = b - a * x;
            out.rows_mut(n, n).copy_from(&bottom);
            out
        };
        let jac_data = Arc::clone(&data);
        let jacobian = move |z: &Point| {
            let (a, _, l2) = jac_data.as_ref();
            let x = z.x();
            let norm_x = x.norm();
            let mut out = DMatrix::zeros(2 * n, 2 * n);
            if norm_x > 0.0 {
                let scale = l2 / 2.0;
                for i in 0..n {
                    for j in 0..n {
                        let mut v = scale * x[i] * x[j] / norm_x;
                        if i == j {
                            v += scale * norm_x;
                        }
                        out[(i, j)] = v;
                    }
                }
            }
            out.view_mut((0, n), (n, n)).copy_from(&a.transpose());
            let mut lower_left = out.view_mut((n, 0), (n, n));
            lower_left.copy_from(a);
            lower_left.neg_mut();
            out
        };
        SaddleProblem::new(n, n, Box::new(operator), Box::new(jacobian), self.l2)
            .expect("benchmark dimensions are valid")
    }

    pub fn to_json(&self) -> Result<String, ProblemError> {
        let wire = BenchmarkWire {
            kind: "benchmark".into(),
            n: self.n(),
            l2: self.l2,
            seed: self.seed,
            a: MatrixWire::from_matrix(&self.a),
            b: self.b.iter().copied().collect(),
        };
        Ok(serde_json::to_string(&wire)?)
    }

    pub fn from_json(json: &str) -> Result<Self, ProblemError> {
        let wire: BenchmarkWire = serde_json::from_str(json)?;
        Ok(Self {
            a: wire.a.to_matrix(),
            b: DVector::from_vec(wire.b),
            l2: wire.l2,
            seed: wire.seed,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct BenchmarkWire {
    kind: String,
    n: usize,
    l2: f64,
    seed: u64,
    a: MatrixWire,
    b: Vec<f64>,
}

/// Benchmark instance as a ready-to-solve problem. `n` is the block
/// dimension: the ambient space is `ℝ^{2n}`.
pub fn make_benchmark(n: usize, l2: f64, seed: u64) -> Result<SaddleProblem, ProblemError> {
    BenchmarkInstance::generate(n, l2, seed).to_problem()
}

/// Closed-form solution of an instance; see
/// [`BenchmarkInstance::known_solution`].
pub fn known_solution(instance: &BenchmarkInstance) -> Result<Point, ProblemError> {
    instance.known_solution()
}
