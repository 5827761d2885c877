//! First-order and line-search baselines sharing the [`RunTrace`] interface.

use nalgebra::DVector;

use crate::core::linalg::{shifted_solve, spectral_norm_power};
use crate::core::{Point, SaddleProblem, SolverState};

use super::som::{evaluate_flags, FlagInputs, StepOutcome};
use super::trace::{IterationRecord, RunTrace, SolverSettings, TerminationReason, TraceBuilder};
use super::SolverError;

/// One extragradient step: `z_half = z − γF(z)`, returns `z − γF(z_half)`.
pub fn extragradient_step(problem: &SaddleProblem, z: &Point, gamma: f64) -> Point {
    assert!(gamma > 0.0, "extragradient step size must be positive");
    let z_half = z.with_values(z.values() - problem.eval_operator(z) * gamma);
    z.with_values(z.values() - problem.eval_operator(&z_half) * gamma)
}

/// One optimistic gradient step: `z − 2γF(z) + γ·z_prev_grad`, where
/// `z_prev_grad` is the operator at the previous iterate.
pub fn ogda_step(
    problem: &SaddleProblem,
    z: &Point,
    z_prev_grad: &DVector<f64>,
    gamma: f64,
) -> Point {
    assert!(
        gamma > 0.0,
        "optimistic gradient step size must be positive"
    );
    let f = problem.eval_operator(z);
    z.with_values(z.values() - f * (2.0 * gamma) + z_prev_grad * gamma)
}

/// Classical stability default `γ = 0.5 / ‖F'(z₁)‖` with the operator norm
/// estimated by power iteration. Falls back to 1 for a vanishing Jacobian.
pub fn default_baseline_gamma(problem: &SaddleProblem, z_init: &Point) -> f64 {
    let l1_est = spectral_norm_power(&problem.eval_jacobian(z_init), 300);
    if l1_est > 0.0 {
        0.5 / l1_est
    } else {
        1.0
    }
}

fn stop(norm_f: f64, grad_tol: f64, norm_f_init: f64) -> bool {
    norm_f == 0.0 || (grad_tol.is_finite() && norm_f <= grad_tol * norm_f_init)
}

/// Runs extragradient with fixed step size (the calibrated default when
/// `gamma` is `None`).
pub fn run_extragradient(
    problem: &SaddleProblem,
    gamma: Option<f64>,
    max_iters: usize,
    grad_tol: f64,
    z_init: &Point,
) -> Result<RunTrace, SolverError> {
    let gamma = gamma.unwrap_or_else(|| default_baseline_gamma(problem, z_init));
    let mut z = z_init.clone();
    let mut f = problem.eval_operator(&z);
    let norm_f_init = f.norm();
    let mut builder = TraceBuilder::new(z_init, norm_f_init);
    let mut termination = TerminationReason::MaxIters;

    for t in 1..=max_iters {
        let norm_f = f.norm();
        if stop(norm_f, grad_tol, norm_f_init) {
            termination = TerminationReason::Converged;
            break;
        }
        let z_half = z.with_values(z.values() - &f * gamma);
        let f_half = problem.eval_operator(&z_half);
        let z_next = z.with_values(z.values() - &f_half * gamma);
        let step_len = z_next.distance(&z);
        builder.push(
            z_next.clone(),
            gamma,
            IterationRecord {
                t,
                eta: gamma,
                lambda: 0.0,
                norm_f,
                norm_e: 0.0,
                step_len,
                residual: 0.0,
                backtracks: 0,
                flags: None,
            },
        );
        z = z_next;
        f = problem.eval_operator(&z);
    }
    let final_norm_f = f.norm();
    if termination == TerminationReason::MaxIters && stop(final_norm_f, grad_tol, norm_f_init) {
        termination = TerminationReason::Converged;
    }
    Ok(builder.finish(
        final_norm_f,
        SolverSettings::Extragradient {
            gamma,
            max_iters,
            grad_tol,
        },
        termination,
    ))
}

/// Runs the first-order optimistic method `z_{t+1} = z_t − 2γF(z_t) + γF(z_{t−1})`
/// with `F(z₀) = F(z₁)` for the degenerate first iteration.
pub fn run_ogda(
    problem: &SaddleProblem,
    gamma: Option<f64>,
    max_iters: usize,
    grad_tol: f64,
    z_init: &Point,
) -> Result<RunTrace, SolverError> {
    let gamma = gamma.unwrap_or_else(|| default_baseline_gamma(problem, z_init));
    let mut z = z_init.clone();
    let mut f = problem.eval_operator(&z);
    let mut f_prev = f.clone();
    let norm_f_init = f.norm();
    let mut builder = TraceBuilder::new(z_init, norm_f_init);
    let mut termination = TerminationReason::MaxIters;

    for t in 1..=max_iters {
        let norm_f = f.norm();
        if stop(norm_f, grad_tol, norm_f_init) {
            termination = TerminationReason::Converged;
            break;
        }
        let z_next = z.with_values(z.values() - &f * (2.0 * gamma) + &f_prev * gamma);
        let step_len = z_next.distance(&z);
        builder.push(
            z_next.clone(),
            gamma,
            IterationRecord {
                t,
                eta: gamma,
                lambda: 0.0,
                norm_f,
                norm_e: 0.0,
                step_len,
                residual: 0.0,
                backtracks: 0,
                flags: None,
            },
        );
        z = z_next;
        f_prev = std::mem::replace(&mut f, problem.eval_operator(&z));
    }
    let final_norm_f = f.norm();
    if termination == TerminationReason::MaxIters && stop(final_norm_f, grad_tol, norm_f_init) {
        termination = TerminationReason::Converged;
    }
    Ok(builder.finish(
        final_norm_f,
        SolverSettings::Ogda {
            gamma,
            max_iters,
            grad_tol,
        },
        termination,
    ))
}

/// Parameters of the line-search second-order baseline.
#[derive(Debug, Clone, Copy)]
pub struct LinesearchConfig {
    /// Acceptance constant of the error condition, in (0, 0.5].
    pub alpha_ls: f64,
    /// Backtracking factor in (0, 1).
    pub beta: f64,
    /// First trial step size.
    pub eta_init: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub check_invariants: bool,
}

impl Default for LinesearchConfig {
    fn default() -> Self {
        Self {
            alpha_ls: 0.5,
            beta: 0.5,
            eta_init: 1.0,
            max_iters: 1000,
            grad_tol: 0.0,
            check_invariants: false,
        }
    }
}

const MAX_BACKTRACKS: u32 = 60;

/// One step of the line-search second-order optimistic baseline: the
/// optimistic update with λ = 1 fixed, backtracking `η ← βη` from `eta_try`
/// until the candidate satisfies the error condition
/// `η‖e_{t+1}‖ ≤ α_ls‖z_{t+1} − z_t‖`. The accepted step satisfies the
/// condition by construction; the record carries the backtrack count.
///
/// Gives up after 60 reductions, which signals a pathological instance.
pub fn linesearch_som_step(
    problem: &SaddleProblem,
    state: &mut SolverState,
    alpha_ls: f64,
    beta: f64,
    eta_try: f64,
) -> Result<StepOutcome, SolverError> {
    assert!(
        alpha_ls > 0.0 && alpha_ls <= 0.5,
        "alpha_ls must lie in (0, 0.5]"
    );
    assert!(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
    assert!(eta_try > 0.0, "eta_try must be positive");

    let norm_f = state.f_curr.norm();
    if norm_f <= 0.0 || norm_f.is_nan() {
        return Err(SolverError::ZeroOperatorNorm);
    }
    let norm_e = state.e_curr.norm();
    let jac = problem.eval_jacobian(&state.z_curr);

    let mut eta = eta_try;
    let mut backtracks = 0;
    loop {
        let rhs = &state.f_curr * eta + &state.e_curr * state.eta_prev;
        let solve = shifted_solve(1.0, eta, &jac, &rhs)?;
        let step_len = solve.w.norm();
        let z_next = state.z_curr.with_values(state.z_curr.values() - &solve.w);
        let f_next = problem.eval_operator(&z_next);
        let jw = &jac * &solve.w;
        let e_next = &f_next - &state.f_curr + &jw;

        if eta * e_next.norm() <= alpha_ls * step_len {
            let flags = {
                let mut flags = evaluate_flags(&FlagInputs {
                    option: None,
                    alpha: alpha_ls,
                    l2: problem.lipschitz_hessian(),
                    l1: problem.lipschitz_gradient(),
                    t: state.t,
                    eta,
                    eta_prev: state.eta_prev,
                    lambda: 1.0,
                    lambda_prev: 1.0,
                    lambda_next: 1.0,
                    lambda_first: Some(1.0),
                    norm_f,
                    norm_e,
                    norm_e_next: e_next.norm(),
                    step_len,
                    residual: solve.residual,
                    residual_tol: solve.tolerance,
                    fp_scale: 1.0 + f_next.norm() + norm_f + jw.norm(),
                    sum_eta: None,
                    sum_inv_eta_sq: None,
                    sum_step_sq: None,
                    dist_init: None,
                    dist_next: None,
                });
                // The quadratic-root step bound does not apply to
                // backtracked η.
                flags.eta_step_bound = None;
                flags
            };
            let record = IterationRecord {
                t: state.t,
                eta,
                lambda: 1.0,
                norm_f,
                norm_e,
                step_len,
                residual: solve.residual,
                backtracks,
                flags: Some(flags),
            };

            state.z_prev = std::mem::replace(&mut state.z_curr, z_next.clone());
            state.f_curr = f_next;
            state.e_curr = e_next.clone();
            state.eta_prev = eta;
            state.lambda_curr = 1.0;
            state.sum_eta += eta;
            state.weighted_sum.axpy(eta, z_next.values(), 1.0);
            state.t += 1;

            return Ok(StepOutcome {
                z_next,
                eta_used: eta,
                lambda_used: 1.0,
                e_next,
                record,
            });
        }
        if backtracks >= MAX_BACKTRACKS {
            return Err(SolverError::LineSearchFailed { backtracks });
        }
        eta *= beta;
        backtracks += 1;
    }
}

/// Line-search second-order optimistic baseline driver. Each iteration's
/// trial η starts at the previously accepted value divided by β so the step
/// size can grow.
pub fn run_linesearch_som(
    problem: &SaddleProblem,
    config: &LinesearchConfig,
    z_init: &Point,
) -> Result<RunTrace, SolverError> {
    assert!(config.eta_init > 0.0, "eta_init must be positive");
    if z_init.dim() != problem.dim() {
        return Err(SolverError::Core(
            crate::core::CoreError::DimensionMismatch(format!(
                "z_init has dim {}, problem has dim {}",
                z_init.dim(),
                problem.dim()
            )),
        ));
    }

    // The line search shares the solver-state carry with λ pinned to the
    // unit regularization of its update rule.
    let f_curr = problem.eval_operator(z_init);
    let mut state = SolverState {
        z_prev: z_init.clone(),
        z_curr: z_init.clone(),
        eta_prev: 0.0,
        lambda_curr: 1.0,
        e_curr: DVector::zeros(problem.dim()),
        f_curr,
        sum_eta: 0.0,
        weighted_sum: DVector::zeros(problem.dim()),
        t: 1,
    };
    let mut eta_try = config.eta_init;
    let norm_f_init = state.f_curr.norm();
    let mut builder = TraceBuilder::new(z_init, norm_f_init);
    let mut termination = TerminationReason::MaxIters;

    for _ in 1..=config.max_iters {
        if stop(state.f_curr.norm(), config.grad_tol, norm_f_init) {
            termination = TerminationReason::Converged;
            break;
        }
        let mut out =
            linesearch_som_step(problem, &mut state, config.alpha_ls, config.beta, eta_try)?;
        if !config.check_invariants {
            out.record.flags = None;
        }
        eta_try = out.eta_used / config.beta;
        builder.push(out.z_next, out.eta_used, out.record);
    }
    let final_norm_f = state.f_curr.norm();
    if termination == TerminationReason::MaxIters
        && stop(final_norm_f, config.grad_tol, norm_f_init)
    {
        termination = TerminationReason::Converged;
    }
    Ok(builder.finish(
        final_norm_f,
        SolverSettings::LinesearchSom {
            alpha_ls: config.alpha_ls,
            beta: config.beta,
            eta_init: config.eta_init,
            max_iters: config.max_iters,
            grad_tol: config.grad_tol,
        },
        termination,
    ))
}
