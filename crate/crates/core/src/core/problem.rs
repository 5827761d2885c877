use nalgebra::{DMatrix, DVector};

use super::{CoreError, Point};

type OperatorFn = dyn Fn(&Point) -> DVector<f64> + Send + Sync;
type JacobianFn = dyn Fn(&Point) -> DMatrix<f64> + Send + Sync;

/// Evaluator bundle for a saddle point problem: the stacked operator
/// `F(z) = [∇_x f; -∇_y f]`, its Jacobian `F'(z)`, and smoothness constants.
///
/// `lipschitz_hessian` is the Hessian-Lipschitz constant `L₂ ≥ 0` of the
/// objective (0 for affine operators); `lipschitz_gradient` is the gradient
/// Lipschitz constant `L₁` when the operator is globally Lipschitz, `None`
/// otherwise. A known solution `z*` with `F(z*) = 0` is attached when the
/// instance has one in closed form.
pub struct SaddleProblem {
    dim_x: usize,
    dim_y: usize,
    operator: Box<OperatorFn>,
    jacobian: Box<JacobianFn>,
    lipschitz_hessian: f64,
    lipschitz_gradient: Option<f64>,
    known_solution: Option<Point>,
}

impl SaddleProblem {
    pub fn new(
        dim_x: usize,
        dim_y: usize,
        operator: Box<OperatorFn>,
        jacobian: Box<JacobianFn>,
        lipschitz_hessian: f64,
    ) -> Result<Self, CoreError> {
        if dim_x == 0 || dim_y == 0 {
            return Err(CoreError::DimensionMismatch(
                "both blocks must be nonempty".into(),
            ));
        }
        if !(lipschitz_hessian >= 0.0 && lipschitz_hessian.is_finite()) {
            return Err(CoreError::InvalidParameter(format!(
                "lipschitz_hessian must be finite and >= 0, got {lipschitz_hessian}"
            )));
        }
        Ok(Self {
            dim_x,
            dim_y,
            operator,
            jacobian,
            lipschitz_hessian,
            lipschitz_gradient: None,
            known_solution: None,
        })
    }

    pub fn with_lipschitz_gradient(mut self, l1: f64) -> Self {
        self.lipschitz_gradient = Some(l1);
        self
    }

    pub fn with_known_solution(mut self, z_star: Point) -> Self {
        debug_assert_eq!(z_star.dim(), self.dim());
        self.known_solution = Some(z_star);
        self
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn dim_y(&self) -> usize {
        self.dim_y
    }

    /// Ambient dimension `m + n`.
    pub fn dim(&self) -> usize {
        self.dim_x + self.dim_y
    }

    pub fn lipschitz_hessian(&self) -> f64 {
        self.lipschitz_hessian
    }

    pub fn lipschitz_gradient(&self) -> Option<f64> {
        self.lipschitz_gradient
    }

    pub fn known_solution(&self) -> Option<&Point> {
        self.known_solution.as_ref()
    }

    /// Evaluates `F(z)`, checking the output length.
    pub fn eval_operator(&self, z: &Point) -> DVector<f64> {
        debug_assert_eq!(z.dim(), self.dim());
        let out = (self.operator)(z);
        assert_eq!(
            out.len(),
            self.dim(),
            "operator output length {} != m+n = {}",
            out.len(),
            self.dim()
        );
        out
    }

    /// Evaluates `F'(z)`, checking that the output is square of side `m+n`.
    pub fn eval_jacobian(&self, z: &Point) -> DMatrix<f64> {
        debug_assert_eq!(z.dim(), self.dim());
        let out = (self.jacobian)(z);
        assert_eq!(
            (out.nrows(), out.ncols()),
            (self.dim(), self.dim()),
            "jacobian output is {}x{}, expected square of side {}",
            out.nrows(),
            out.ncols(),
            self.dim()
        );
        out
    }

    /// `‖F(z)‖`.
    pub fn operator_norm_at(&self, z: &Point) -> f64 {
        self.eval_operator(z).norm()
    }
}

impl std::fmt::Debug for SaddleProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SaddleProblem")
            .field("dim_x", &self.dim_x)
            .field("dim_y", &self.dim_y)
            .field("lipschitz_hessian", &self.lipschitz_hessian)
            .field("lipschitz_gradient", &self.lipschitz_gradient)
            .field("known_solution", &self.known_solution.is_some())
            .finish()
    }
}
