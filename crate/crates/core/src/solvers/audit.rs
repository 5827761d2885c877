//! Post-hoc verification of a finished trace.
//!
//! The audit replays every per-iteration inequality from the recorded
//! scalars and stored iterates alone — no operator re-evaluation — so the
//! quantities it grades are bit-identical to what the solver saw. It exists
//! for forensic checking of traces (including deliberately corrupted ones)
//! independently of the flags recorded while the run was live.

use serde::Serialize;

use crate::core::{SaddleProblem, SomOption};

use super::trace::{RunTrace, SolverSettings};

/// One failed check: the step it occurred at (`None` for whole-trace
/// checks), the check's name, and the two sides of the inequality.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub t: Option<usize>,
    pub check: String,
    pub observed: f64,
    pub bound: f64,
}

fn violation(t: usize, check: &str, observed: f64, bound: f64) -> Violation {
    Violation {
        t: Some(t),
        check: check.to_string(),
        observed,
        bound,
    }
}

/// Replays all applicable invariants over a trace. Returns the empty vector
/// when the trace is internally consistent.
pub fn audit_trace(problem: &SaddleProblem, trace: &RunTrace) -> Vec<Violation> {
    let mut out = Vec::new();

    // Flags recorded live that failed.
    for rec in &trace.records {
        if let Some(flags) = &rec.flags {
            for name in flags.failed() {
                out.push(violation(rec.t, name, f64::NAN, f64::NAN));
            }
        }
    }

    audit_averaging(trace, &mut out);
    audit_best_iterate(trace, &mut out);

    match &trace.settings {
        SolverSettings::AdaptiveSom(config) => {
            audit_som_steps(problem, trace, config.alpha, config.option, &mut out);
            audit_eta_quadratic(problem, trace, &mut out);
            audit_prefix_sums(problem, trace, config.alpha, &mut out);
        }
        SolverSettings::LinesearchSom { alpha_ls, .. } => {
            audit_error_condition(trace, *alpha_ls, None, &mut out);
        }
        _ => {}
    }
    out
}

/// `averaged_iterate` must equal the explicit η-weighted sum recomputed from
/// the trace within 1e−12 relative.
fn audit_averaging(trace: &RunTrace, out: &mut Vec<Violation>) {
    let mut sum = nalgebra::DVector::zeros(trace.last_iterate.dim());
    let mut total = 0.0;
    for (k, rec) in trace.records.iter().enumerate() {
        sum.axpy(rec.eta, trace.iterates[k + 1].values(), 1.0);
        total += rec.eta;
    }
    if total > 0.0 {
        let recomputed = sum / total;
        let diff = (&recomputed - trace.averaged_iterate.values()).norm();
        let tol = 1e-12 * (1.0 + recomputed.norm());
        if diff > tol {
            out.push(Violation {
                t: None,
                check: "averaging_identity".into(),
                observed: diff,
                bound: tol,
            });
        }
    }
}

/// `best_opnorm_iterate` must attain the minimum recorded `‖F(z_t)‖`.
fn audit_best_iterate(trace: &RunTrace, out: &mut Vec<Violation>) {
    let min = trace
        .norm_f_series()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if trace.best_norm_f > min {
        out.push(Violation {
            t: None,
            check: "best_iterate".into(),
            observed: trace.best_norm_f,
            bound: min,
        });
    }
}

/// Step-local inequalities from recorded scalars: the step-length bound,
/// `η‖Δz‖ ≤ 2α`, the λ-tracking recursion, the λ cap, the error condition,
/// the Taylor remainder, and the Lipschitz prediction-error bound.
fn audit_som_steps(
    problem: &SaddleProblem,
    trace: &RunTrace,
    alpha: f64,
    option: SomOption,
    out: &mut Vec<Violation>,
) {
    let l2 = problem.lipschitz_hessian();
    let records = &trace.records;
    let lambda_first = records.first().map_or(0.0, |r| r.lambda);
    for (k, rec) in records.iter().enumerate() {
        let eta_prev = if k == 0 { 0.0 } else { records[k - 1].eta };

        let step_bound = (rec.eta * rec.norm_f + eta_prev * rec.norm_e) / rec.lambda + 1e-9;
        if rec.step_len > step_bound {
            out.push(violation(
                rec.t,
                "audit_step_bound",
                rec.step_len,
                step_bound,
            ));
        }
        let eta_step = rec.eta * rec.step_len;
        let eta_step_bound = 2.0 * alpha + 1e-9;
        if eta_step > eta_step_bound {
            out.push(violation(
                rec.t,
                "audit_eta_step_bound",
                eta_step,
                eta_step_bound,
            ));
        }

        if option == SomOption::OptionII {
            let lambda_prev = if k == 0 {
                match &trace.settings {
                    SolverSettings::AdaptiveSom(c) => c.lambda_init,
                    _ => rec.lambda,
                }
            } else {
                records[k - 1].lambda
            };
            // The step length entering the tracking rule is the distance
            // between stored iterates, which reproduces the solver's floats.
            let prev_dist = trace.iterates[k].distance(if k == 0 {
                &trace.iterates[0]
            } else {
                &trace.iterates[k - 1]
            });
            let competitor = if prev_dist > 0.0 && rec.norm_e > 0.0 {
                2.0 * rec.norm_e / (prev_dist * prev_dist)
            } else {
                0.0
            };
            let expected = lambda_prev.max(competitor);
            let tol = 1e-9 * expected;
            if (rec.lambda - expected).abs() > tol {
                out.push(violation(rec.t, "lambda_tracking", rec.lambda, expected));
            }
            let cap = lambda_first.max(l2) * (1.0 + 1e-9);
            if rec.lambda > cap {
                out.push(violation(rec.t, "audit_lambda_cap", rec.lambda, cap));
            }
            if rec.lambda < lambda_prev {
                out.push(violation(
                    rec.t,
                    "audit_lambda_monotone",
                    rec.lambda,
                    lambda_prev,
                ));
            }
        }

        // The next record carries ‖e_{t+1}‖ and (for the tracked option)
        // λ_{t+1}, exactly as the solver computed them.
        if let Some(next) = records.get(k + 1) {
            let lambda_next = match option {
                SomOption::OptionI => rec.lambda,
                SomOption::OptionII => next.lambda,
            };
            let slack_scale = 1.0
                + rec.norm_f
                + next.norm_f
                + (eta_prev * rec.norm_e + rec.lambda * rec.step_len) / rec.eta;
            let lhs = rec.eta * next.norm_e;
            let rhs = alpha * lambda_next * rec.step_len + 1e-12 + 1e-12 * slack_scale;
            if lhs > rhs {
                out.push(violation(rec.t, "audit_error_condition", lhs, rhs));
            }
            let taylor =
                0.5 * l2 * (1.0 + 1e-8) * rec.step_len * rec.step_len + 1e-12 * slack_scale;
            if next.norm_e > taylor {
                out.push(violation(rec.t, "audit_taylor_error", next.norm_e, taylor));
            }
            if let Some(l1) = problem.lipschitz_gradient() {
                let bound = 2.0 * l1 * rec.step_len * (1.0 + 1e-9) + 1e-12 * slack_scale;
                if next.norm_e > bound {
                    out.push(violation(
                        rec.t,
                        "audit_pred_error_lipschitz",
                        next.norm_e,
                        bound,
                    ));
                }
            }
        }
    }
}

/// The line-search acceptance test `η_t‖e_{t+1}‖ ≤ α_ls‖Δz‖`, replayed from
/// consecutive records.
fn audit_error_condition(
    trace: &RunTrace,
    alpha: f64,
    lambda_next_fixed: Option<f64>,
    out: &mut Vec<Violation>,
) {
    for k in 0..trace.records.len().saturating_sub(1) {
        let rec = &trace.records[k];
        let next = &trace.records[k + 1];
        let lambda_next = lambda_next_fixed.unwrap_or(1.0);
        let lhs = rec.eta * next.norm_e;
        let rhs = alpha * lambda_next * rec.step_len * (1.0 + 1e-12) + 1e-15;
        if lhs > rhs {
            out.push(violation(rec.t, "audit_error_condition", lhs, rhs));
        }
    }
}

/// Each recorded η must solve its defining quadratic:
/// `η(η‖F‖ + η_{t−1}‖e_t‖) = 2αλ²/L₂` (fixed λ) or `= αλ_t` (tracked λ).
fn audit_eta_quadratic(problem: &SaddleProblem, trace: &RunTrace, out: &mut Vec<Violation>) {
    let Some(config) = trace.settings.som_config() else {
        return;
    };
    let l2 = problem.lipschitz_hessian();
    for (k, rec) in trace.records.iter().enumerate() {
        let eta_prev = if k == 0 {
            0.0
        } else {
            trace.records[k - 1].eta
        };
        let target = match config.option {
            SomOption::OptionI => {
                let l2_eff = if l2 > 0.0 { l2 } else { rec.lambda };
                2.0 * config.alpha * rec.lambda * rec.lambda / l2_eff
            }
            SomOption::OptionII => config.alpha * rec.lambda,
        };
        let attained = rec.eta * (rec.eta * rec.norm_f + eta_prev * rec.norm_e);
        if (attained - target).abs() > 1e-10 * target {
            out.push(violation(rec.t, "eta_quadratic", attained, target));
        }
    }
}

/// Prefix checks: the Hölder identity over recorded η and the path-length
/// bound over stored iterates.
fn audit_prefix_sums(
    problem: &SaddleProblem,
    trace: &RunTrace,
    alpha: f64,
    out: &mut Vec<Violation>,
) {
    let mut sum_eta = 0.0;
    let mut sum_inv = 0.0;
    for (k, rec) in trace.records.iter().enumerate() {
        sum_eta += rec.eta;
        sum_inv += 1.0 / (rec.eta * rec.eta);
        let t = (k + 1) as f64;
        let lhs = sum_eta * sum_inv.sqrt();
        let rhs = t.powf(1.5) * (1.0 - 1e-9);
        if lhs < rhs {
            out.push(violation(rec.t, "audit_hoelder", lhs, rhs));
        }
    }

    if let Some(z_star) = problem.known_solution() {
        let dist_init = trace.iterates[0].distance(z_star);
        let bound = dist_init * dist_init / (1.0 - 2.0 * alpha) * (1.0 + 1e-6) + 1e-12;
        let mut sum_step_sq = 0.0;
        for k in 0..trace.records.len() {
            let step = trace.iterates[k + 1].distance(&trace.iterates[k]);
            sum_step_sq += step * step;
            if sum_step_sq > bound {
                out.push(violation(k + 1, "audit_path_length", sum_step_sq, bound));
            }
        }
    }
}
