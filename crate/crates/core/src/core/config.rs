use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{CoreError, Point, SaddleProblem};

/// Step-size policy of the adaptive second-order optimistic method.
///
/// `OptionI` keeps the regularization λ fixed (at the Hessian-Lipschitz
/// constant when it is known) and needs `L₂`; `OptionII` is parameter-free
/// and tracks λ from a local curvature estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SomOption {
    OptionI,
    OptionII,
}

/// Configuration of an adaptive second-order optimistic run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Error-condition constant α. `OptionI` requires α ∈ (0, 1/2),
    /// `OptionII` requires α ∈ (0, 1/3].
    pub alpha: f64,
    pub option: SomOption,
    /// Fixed λ for `OptionI`; initial λ₀ > 0 for `OptionII`.
    pub lambda_init: f64,
    /// Iteration cap T.
    pub max_iters: usize,
    /// Relative stopping threshold: terminate once `‖F(z_t)‖ ≤ grad_tol·‖F(z₁)‖`.
    pub grad_tol: f64,
    /// Record per-iteration invariant flags alongside the trace.
    pub check_invariants: bool,
}

impl SolverConfig {
    pub fn new(option: SomOption, alpha: f64, lambda_init: f64, max_iters: usize) -> Self {
        Self {
            alpha,
            option,
            lambda_init,
            max_iters,
            grad_tol: 0.0,
            check_invariants: false,
        }
    }

    pub fn with_grad_tol(mut self, grad_tol: f64) -> Self {
        self.grad_tol = grad_tol;
        self
    }

    pub fn with_invariants(mut self, on: bool) -> Self {
        self.check_invariants = on;
        self
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let alpha_ok = match self.option {
            SomOption::OptionI => self.alpha > 0.0 && self.alpha < 0.5,
            SomOption::OptionII => self.alpha > 0.0 && self.alpha <= 1.0 / 3.0,
        };
        if !alpha_ok {
            return Err(CoreError::InvalidParameter(format!(
                "alpha {} out of range for {:?}",
                self.alpha, self.option
            )));
        }
        if !(self.lambda_init > 0.0 && self.lambda_init.is_finite()) {
            return Err(CoreError::InvalidParameter(format!(
                "lambda_init must be positive, got {}",
                self.lambda_init
            )));
        }
        if self.grad_tol < 0.0 || self.grad_tol.is_nan() {
            return Err(CoreError::InvalidParameter(format!(
                "grad_tol must be >= 0, got {}",
                self.grad_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(CoreError::InvalidParameter("max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// One iteration's carry of the optimistic method.
///
/// Entering step `t` the state holds `z_prev = z_{t-1}`, `z_curr = z_t`,
/// `eta_prev = η_{t-1}` (zero only at `t = 1`), the most recent λ,
/// `e_curr = e_t`, and the η-weighted averaging accumulators. `f_curr`
/// caches `F(z_curr)` so each step costs one operator and one Jacobian
/// evaluation.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub z_prev: Point,
    pub z_curr: Point,
    pub eta_prev: f64,
    pub lambda_curr: f64,
    pub e_curr: DVector<f64>,
    pub f_curr: DVector<f64>,
    pub sum_eta: f64,
    pub weighted_sum: DVector<f64>,
    /// Index of the next step to execute, starting at 1.
    pub t: usize,
}

impl SolverState {
    /// Initializes the degenerate first iteration `z₀ = z₁ = z_init` with
    /// `η₀ = 0` and `λ₀ = config.lambda_init`, forcing `e₁ = 0`.
    pub fn init(
        problem: &SaddleProblem,
        config: &SolverConfig,
        z_init: &Point,
    ) -> Result<Self, CoreError> {
        config.validate()?;
        if z_init.dim() != problem.dim() {
            return Err(CoreError::DimensionMismatch(format!(
                "z_init has dim {}, problem has dim {}",
                z_init.dim(),
                problem.dim()
            )));
        }
        let f_curr = problem.eval_operator(z_init);
        Ok(Self {
            z_prev: z_init.clone(),
            z_curr: z_init.clone(),
            eta_prev: 0.0,
            lambda_curr: config.lambda_init,
            e_curr: DVector::zeros(problem.dim()),
            f_curr,
            sum_eta: 0.0,
            weighted_sum: DVector::zeros(problem.dim()),
            t: 1,
        })
    }

    /// The η-weighted averaged iterate accumulated so far, if any step with
    /// positive weight has run.
    pub fn averaged_iterate(&self) -> Option<Point> {
        (self.sum_eta > 0.0).then(|| self.z_curr.with_values(&self.weighted_sum / self.sum_eta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_ranges_differ_per_option() {
        let mut c = SolverConfig::new(SomOption::OptionI, 0.4, 1.0, 10);
        assert!(c.validate().is_ok());
        c.option = SomOption::OptionII;
        assert!(c.validate().is_err());
        c.alpha = 1.0 / 3.0;
        assert!(c.validate().is_ok());
        c.alpha = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn lambda_must_be_positive() {
        let c = SolverConfig::new(SomOption::OptionII, 0.25, 0.0, 10);
        assert!(c.validate().is_err());
    }
}
