//! Affine test problems: bilinear games and convex-concave quadratics.
//!
//! Both have identically zero prediction error along any trajectory (the
//! linearization of an affine operator is exact), which isolates the
//! `L₂ = 0` regime of the solvers. The quadratic family additionally has an
//! exact gradient-Lipschitz constant, the spectral norm of its stacked
//! system matrix.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::core::{Point, SaddleProblem};

use super::random::{gaussian_matrix, gaussian_vector, orthogonal_from_rng, rng_for};
use super::wire::MatrixWire;
use super::ProblemError;

/// Bilinear game `f(x, y) = xᵀBy` with operator `F(z) = [By; −Bᵀx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearInstance {
    b: DMatrix<f64>,
    seed: u64,
}

impl BilinearInstance {
    /// Seeded instance with controlled spectrum: `B = Uᵀ diag(s) V` with
    /// singular values spaced in `[1/2, 1]`, so first-order baselines
    /// converge at a predictable rate.
    pub fn generate(n: usize, seed: u64) -> Self {
        assert!(n >= 1, "bilinear game needs n >= 1");
        let u = orthogonal_from_rng(&mut rng_for(seed, 1), n);
        let v = orthogonal_from_rng(&mut rng_for(seed, 2), n);
        let s = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| {
            if n == 1 {
                1.0
            } else {
                1.0 - 0.5 * i as f64 / (n - 1) as f64
            }
        }));
        Self {
            b: u.transpose() * s * v,
            seed,
        }
    }

    /// Instance with an explicit coupling matrix.
    pub fn with_coupling(b: DMatrix<f64>) -> Self {
        assert_eq!(b.nrows(), b.ncols(), "coupling matrix must be square");
        Self { b, seed: 0 }
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn to_problem(&self) -> SaddleProblem {
        let n = self.n();
        let b = Arc::new(self.b.clone());
        let op_b = Arc::clone(&b);
        let operator = move |z: &Point| {
            let mut out = DVector::zeros(2 * n);
            out.rows_mut(0, n).copy_from(&(op_b.as_ref() * z.y()));
            out.rows_mut(n, n).copy_from(&(-(op_b.transpose() * z.x())));
            out
        };
        let jac_b = Arc::clone(&b);
        let jacobian = move |_: &Point| {
            let mut out = DMatrix::zeros(2 * n, 2 * n);
            out.view_mut((0, n), (n, n)).copy_from(jac_b.as_ref());
            out.view_mut((n, 0), (n, n))
                .copy_from(&(-jac_b.transpose()));
            out
        };

        let svd = self.b.clone().svd(false, false);
        let sigma_max = svd.singular_values.max();
        let sigma_min = svd.singular_values.min();
        let mut problem = SaddleProblem::new(n, n, Box::new(operator), Box::new(jacobian), 0.0)
            .expect("bilinear dimensions are valid")
            .with_lipschitz_gradient(sigma_max);
        if sigma_min > 1e-12 * sigma_max.max(1.0) {
            problem = problem.with_known_solution(Point::zeros(n, n));
        }
        problem
    }

    pub fn to_json(&self) -> Result<String, ProblemError> {
        let wire = BilinearWire {
            kind: "bilinear".into(),
            n: self.n(),
            seed: self.seed,
            b: MatrixWire::from_matrix(&self.b),
        };
        Ok(serde_json::to_string(&wire)?)
    }

    pub fn from_json(json: &str) -> Result<Self, ProblemError> {
        let wire: BilinearWire = serde_json::from_str(json)?;
        Ok(Self {
            b: wire.b.to_matrix(),
            seed: wire.seed,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct BilinearWire {
    kind: String,
    n: usize,
    seed: u64,
    b: MatrixWire,
}

/// Seeded bilinear game; the solution is the origin.
pub fn make_bilinear(n: usize, seed: u64) -> SaddleProblem {
    BilinearInstance::generate(n, seed).to_problem()
}

/// Convex-concave quadratic
/// `f = ½xᵀPx + xᵀBy − ½yᵀQy + c_xᵀx − c_yᵀy` with symmetric PSD `P, Q`.
///
/// The operator is affine: `F(z) = Mz + c` with `M = [[P, B], [−Bᵀ, Q]]`,
/// and `l1` is the exact operator norm `‖M‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticInstance {
    p: DMatrix<f64>,
    q: DMatrix<f64>,
    b: DMatrix<f64>,
    c_x: DVector<f64>,
    c_y: DVector<f64>,
    l1: f64,
    seed: u64,
}

impl QuadraticInstance {
    pub fn generate(m: usize, n: usize, seed: u64) -> Self {
        assert!(m >= 1 && n >= 1, "quadratic needs m, n >= 1");
        let gp = gaussian_matrix(&mut rng_for(seed, 1), m, m);
        let gq = gaussian_matrix(&mut rng_for(seed, 2), n, n);
        let p = gp.transpose() * &gp / m as f64;
        let q = gq.transpose() * &gq / n as f64;
        let b = gaussian_matrix(&mut rng_for(seed, 3), m, n) / (n as f64).sqrt();
        let c_x = gaussian_vector(&mut rng_for(seed, 4), m);
        let c_y = gaussian_vector(&mut rng_for(seed, 5), n);
        Self::assemble(p, q, b, c_x, c_y, seed)
    }

    /// Instance from explicit blocks; `p` and `q` must be symmetric PSD.
    pub fn new(
        p: DMatrix<f64>,
        q: DMatrix<f64>,
        b: DMatrix<f64>,
        c_x: DVector<f64>,
        c_y: DVector<f64>,
    ) -> Result<Self, ProblemError> {
        for (name, mat) in [("P", &p), ("Q", &q)] {
            if mat.nrows() != mat.ncols()
                || (mat - mat.transpose()).norm() > 1e-10 * (1.0 + mat.norm())
            {
                return Err(ProblemError::Invalid(format!("{name} must be symmetric")));
            }
            let min_eig = mat.clone().symmetric_eigenvalues().min();
            if min_eig < -1e-10 * (1.0 + mat.norm()) {
                return Err(ProblemError::Invalid(format!(
                    "{name} must be positive semidefinite (min eigenvalue {min_eig:.3e})"
                )));
            }
        }
        if b.nrows() != p.nrows() || b.ncols() != q.nrows() {
            return Err(ProblemError::Invalid(
                "coupling block has wrong shape".into(),
            ));
        }
        Ok(Self::assemble(p, q, b, c_x, c_y, 0))
    }

    fn assemble(
        p: DMatrix<f64>,
        q: DMatrix<f64>,
        b: DMatrix<f64>,
        c_x: DVector<f64>,
        c_y: DVector<f64>,
        seed: u64,
    ) -> Self {
        let mut inst = Self {
            p,
            q,
            b,
            c_x,
            c_y,
            l1: 0.0,
            seed,
        };
        let svd = inst.stacked_matrix().svd(false, false);
        inst.l1 = svd.singular_values.max();
        inst
    }

    /// The stacked system matrix `M = [[P, B], [−Bᵀ, Q]]`.
    pub fn stacked_matrix(&self) -> DMatrix<f64> {
        let m = self.p.nrows();
        let n = self.q.nrows();
        let mut out = DMatrix::zeros(m + n, m + n);
        out.view_mut((0, 0), (m, m)).copy_from(&self.p);
        out.view_mut((0, m), (m, n)).copy_from(&self.b);
        out.view_mut((m, 0), (n, m))
            .copy_from(&(-self.b.transpose()));
        out.view_mut((m, m), (n, n)).copy_from(&self.q);
        out
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stationary point from `Mz = −c`.
    pub fn known_solution(&self) -> Result<Point, ProblemError> {
        let m = self.p.nrows();
        let n = self.q.nrows();
        let mut c = DVector::zeros(m + n);
        c.rows_mut(0, m).copy_from(&self.c_x);
        c.rows_mut(m, n).copy_from(&self.c_y);
        let z = self
            .stacked_matrix()
            .lu()
            .solve(&(-c))
            .ok_or_else(|| ProblemError::Singular("quadratic stationarity system".into()))?;
        Ok(Point::new(z, m)?)
    }

    pub fn to_problem(&self) -> Result<SaddleProblem, ProblemError> {
        let m = self.p.nrows();
        let n = self.q.nrows();
        let z_star = self.known_solution()?;
        let matrix = Arc::new(self.stacked_matrix());
        let mut c = DVector::zeros(m + n);
        c.rows_mut(0, m).copy_from(&self.c_x);
        c.rows_mut(m, n).copy_from(&self.c_y);
        let c = Arc::new(c);

        let op_m = Arc::clone(&matrix);
        let op_c = Arc::clone(&c);
        let operator = move |z: &Point| op_m.as_ref() * z.values() + op_c.as_ref();
        let jac_m = Arc::clone(&matrix);
        let jacobian = move |_: &Point| jac_m.as_ref().clone();

        Ok(
            SaddleProblem::new(m, n, Box::new(operator), Box::new(jacobian), 0.0)?
                .with_lipschitz_gradient(self.l1)
                .with_known_solution(z_star),
        )
    }

    pub fn to_json(&self) -> Result<String, ProblemError> {
        let wire = QuadraticWire {
            kind: "quadratic".into(),
            m: self.p.nrows(),
            n: self.q.nrows(),
            seed: self.seed,
            p: MatrixWire::from_matrix(&self.p),
            q: MatrixWire::from_matrix(&self.q),
            b: MatrixWire::from_matrix(&self.b),
            c_x: self.c_x.iter().copied().collect(),
            c_y: self.c_y.iter().copied().collect(),
        };
        Ok(serde_json::to_string(&wire)?)
    }

    pub fn from_json(json: &str) -> Result<Self, ProblemError> {
        let wire: QuadraticWire = serde_json::from_str(json)?;
        Ok(Self::assemble(
            wire.p.to_matrix(),
            wire.q.to_matrix(),
            wire.b.to_matrix(),
            DVector::from_vec(wire.c_x),
            DVector::from_vec(wire.c_y),
            wire.seed,
        ))
    }
}

#[derive(Serialize, Deserialize)]
struct QuadraticWire {
    kind: String,
    m: usize,
    n: usize,
    seed: u64,
    p: MatrixWire,
    q: MatrixWire,
    b: MatrixWire,
    c_x: Vec<f64>,
    c_y: Vec<f64>,
}

/// Seeded convex-concave quadratic with exact `L₁`.
pub fn make_quadratic(m: usize, n: usize, seed: u64) -> Result<SaddleProblem, ProblemError> {
    QuadraticInstance::generate(m, n, seed).to_problem()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::linalg::spectral_norm_power;
    use crate::core::monotonicity_probe;

    #[test]
    fn identity_coupling_operator() {
        let inst = BilinearInstance::with_coupling(DMatrix::identity(2, 2));
        let problem = inst.to_problem();
        let z = Point::from_parts(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        let f = problem.eval_operator(&z);
        // F = [y; -x].
        assert_eq!(f.as_slice(), &[3.0, 4.0, -1.0, -2.0]);
    }

    #[test]
    fn bilinear_probe_is_exactly_zero() {
        let problem = make_bilinear(5, 3);
        let mut rng = rng_for(17, 0);
        for _ in 0..50 {
            let z1 = Point::new(gaussian_vector(&mut rng, 10), 5).unwrap();
            let z2 = Point::new(gaussian_vector(&mut rng, 10), 5).unwrap();
            let probe = monotonicity_probe(&problem, &z1, &z2);
            assert!(probe.abs() < 1e-12 * (1.0 + z1.distance(&z2).powi(2)));
        }
    }

    #[test]
    fn zero_blocks_reduce_quadratic_to_bilinear() {
        let b = BilinearInstance::generate(3, 5);
        let quad = QuadraticInstance::new(
            DMatrix::zeros(3, 3),
            DMatrix::zeros(3, 3),
            b.coupling().clone(),
            DVector::zeros(3),
            DVector::zeros(3),
        )
        .unwrap();
        let qp = quad.to_problem().unwrap();
        let bp = b.to_problem();
        let z = Point::from_parts(&[1.0, -2.0, 0.5], &[0.25, 3.0, -1.0]).unwrap();
        assert!((qp.eval_operator(&z) - bp.eval_operator(&z)).norm() < 1e-14);
    }

    #[test]
    fn scalar_quadratic_solution_is_origin() {
        let quad = QuadraticInstance::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::zeros(1),
            DVector::zeros(1),
        )
        .unwrap();
        let z = quad.known_solution().unwrap();
        assert!(z.norm() < 1e-14);
    }

    #[test]
    fn l1_matches_power_iteration_oracle() {
        let inst = QuadraticInstance::generate(6, 4, 9);
        let oracle = spectral_norm_power(&inst.stacked_matrix(), 2000);
        assert!((inst.l1() - oracle).abs() <= 1e-8 * inst.l1());
    }

    #[test]
    fn quadratic_solution_is_stationary() {
        let inst = QuadraticInstance::generate(5, 5, 4);
        let problem = inst.to_problem().unwrap();
        let z_star = inst.known_solution().unwrap();
        assert!(problem.operator_norm_at(&z_star) < 1e-10 * (1.0 + inst.l1()));
    }

    #[test]
    fn json_roundtrips() {
        let b = BilinearInstance::generate(4, 8);
        assert_eq!(
            b,
            BilinearInstance::from_json(&b.to_json().unwrap()).unwrap()
        );
        let q = QuadraticInstance::generate(3, 4, 8);
        assert_eq!(
            q,
            QuadraticInstance::from_json(&q.to_json().unwrap()).unwrap()
        );
    }
}
