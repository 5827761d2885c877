//! Per-iteration telemetry and whole-run traces.

use nalgebra::DVector;
use serde::Serialize;

use crate::core::{Point, SolverConfig};

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    /// `‖F(z_t)‖` fell below the relative threshold.
    Converged,
    /// The iteration cap was reached.
    MaxIters,
}

/// Snapshot of the solver parameters a trace was produced with.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "solver", rename_all = "snake_case")]
pub enum SolverSettings {
    AdaptiveSom(SolverConfig),
    Extragradient {
        gamma: f64,
        max_iters: usize,
        grad_tol: f64,
    },
    Ogda {
        gamma: f64,
        max_iters: usize,
        grad_tol: f64,
    },
    LinesearchSom {
        alpha_ls: f64,
        beta: f64,
        eta_init: f64,
        max_iters: usize,
        grad_tol: f64,
    },
}

impl SolverSettings {
    pub fn som_config(&self) -> Option<&SolverConfig> {
        match self {
            SolverSettings::AdaptiveSom(c) => Some(c),
            _ => None,
        }
    }
}

/// Named per-iteration inequality checks. `None` means the check does not
/// apply to the run (wrong option, or the problem lacks the constant it
/// needs); `Some(false)` is a violation.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct InvariantFlags {
    /// `‖z_{t+1}−z_t‖ ≤ (η_t‖F(z_t)‖ + η_{t−1}‖e_t‖)/λ_t + 1e−9`.
    pub step_bound: Option<bool>,
    /// `η_t‖z_{t+1}−z_t‖ ≤ 2α + 1e−9`.
    pub eta_step_bound: Option<bool>,
    /// `η_t‖e_{t+1}‖ ≤ α·λ_{t+1}·‖z_{t+1}−z_t‖ + 1e−12` (λ_{t+1} = λ for the
    /// fixed-λ option, the tracked value otherwise; 1 for the line-search
    /// baseline).
    pub error_condition: Option<bool>,
    /// Second-order Taylor remainder: `‖e_{t+1}‖ ≤ (L₂/2)(1+1e−8)‖Δz‖²`
    /// plus a rounding allowance.
    pub taylor_error: Option<bool>,
    /// The linear-solve residual stayed within its tolerance.
    pub residual_ok: Option<bool>,
    /// Prefix Hölder identity `(Σ η_s)·√(Σ 1/η_s²) ≥ t^{1.5}`.
    pub hoelder: Option<bool>,
    /// λ never decreases (parameter-free option).
    pub lambda_monotone: Option<bool>,
    /// `λ_t ≤ max{λ₁, L₂}·(1+1e−9)` (parameter-free option).
    pub lambda_cap: Option<bool>,
    /// `‖z_{t+1}−z*‖ ≤ ‖z₁−z*‖/√(1−α)·(1+1e−6)` (fixed-λ option).
    pub boundedness: Option<bool>,
    /// Running `Σ‖Δz‖² ≤ ‖z₁−z*‖²/(1−2α)·(1+1e−6)`.
    pub path_length: Option<bool>,
    /// `‖e_{t+1}‖ ≤ 2L₁‖Δz‖` plus a rounding allowance, when L₁ is known.
    pub pred_error_lipschitz: Option<bool>,
}

impl InvariantFlags {
    pub const NAMES: [&'static str; 11] = [
        "step_bound",
        "eta_step_bound",
        "error_condition",
        "taylor_error",
        "residual_ok",
        "hoelder",
        "lambda_monotone",
        "lambda_cap",
        "boundedness",
        "path_length",
        "pred_error_lipschitz",
    ];

    pub fn named(&self) -> [(&'static str, Option<bool>); 11] {
        [
            ("step_bound", self.step_bound),
            ("eta_step_bound", self.eta_step_bound),
            ("error_condition", self.error_condition),
            ("taylor_error", self.taylor_error),
            ("residual_ok", self.residual_ok),
            ("hoelder", self.hoelder),
            ("lambda_monotone", self.lambda_monotone),
            ("lambda_cap", self.lambda_cap),
            ("boundedness", self.boundedness),
            ("path_length", self.path_length),
            ("pred_error_lipschitz", self.pred_error_lipschitz),
        ]
    }

    /// Names of the checks that applied and failed.
    pub fn failed(&self) -> Vec<&'static str> {
        self.named()
            .iter()
            .filter_map(|(name, v)| (*v == Some(false)).then_some(*name))
            .collect()
    }

    pub fn all_hold(&self) -> bool {
        self.named().iter().all(|(_, v)| *v != Some(false))
    }
}

/// One iteration's telemetry.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub t: usize,
    pub eta: f64,
    pub lambda: f64,
    /// `‖F(z_t)‖` at the step's base point.
    pub norm_f: f64,
    /// `‖e_t‖`.
    pub norm_e: f64,
    /// `‖z_{t+1} − z_t‖`.
    pub step_len: f64,
    /// Linear-solve residual (0 for solvers without an inner solve).
    pub residual: f64,
    /// Backtracking count (line-search baseline only).
    pub backtracks: u32,
    pub flags: Option<InvariantFlags>,
}

/// Ordered iteration records plus the run's derived iterates and metadata.
///
/// `iterates[k]` is `z_{k+1}` (so `iterates[0] = z₁`); `records[k]` describes
/// the step from `z_{k+1}` to `z_{k+2}`. The averaged iterate is the
/// η-weighted mean `z̄ = Σ η_t z_{t+1} / Σ η_t`.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub iterates: Vec<Point>,
    pub averaged_iterate: Point,
    pub last_iterate: Point,
    pub best_opnorm_iterate: Point,
    pub best_norm_f: f64,
    /// `‖F(z₁)‖`.
    pub initial_norm_f: f64,
    /// `‖F(z_{T+1})‖` at the final iterate.
    pub final_norm_f: f64,
    pub settings: SolverSettings,
    pub seed: Option<u64>,
    pub termination: TerminationReason,
}

impl RunTrace {
    /// `‖F(z_t)‖` for `t = 1..=T+1`: the per-record base norms followed by
    /// the final iterate's norm.
    pub fn norm_f_series(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.records.iter().map(|r| r.norm_f).collect();
        out.push(self.final_norm_f);
        out
    }

    /// Running minimum of [`Self::norm_f_series`].
    pub fn best_norm_f_series(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.norm_f_series()
            .into_iter()
            .map(|v| {
                best = best.min(v);
                best
            })
            .collect()
    }

    pub fn etas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.eta).collect()
    }

    /// Total invariant violations across all recorded flags.
    pub fn invariant_failures(&self) -> usize {
        self.records
            .iter()
            .filter_map(|r| r.flags.as_ref())
            .map(|f| f.failed().len())
            .sum()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Accumulates iterates and records during a run and finalizes the trace.
pub(crate) struct TraceBuilder {
    records: Vec<IterationRecord>,
    iterates: Vec<Point>,
    weighted_sum: DVector<f64>,
    sum_weight: f64,
    initial_norm_f: f64,
}

impl TraceBuilder {
    pub fn new(z_init: &Point, initial_norm_f: f64) -> Self {
        Self {
            records: Vec::new(),
            iterates: vec![z_init.clone()],
            weighted_sum: DVector::zeros(z_init.dim()),
            sum_weight: 0.0,
            initial_norm_f,
        }
    }

    pub fn push(&mut self, z_next: Point, weight: f64, record: IterationRecord) {
        self.weighted_sum.axpy(weight, z_next.values(), 1.0);
        self.sum_weight += weight;
        self.iterates.push(z_next);
        self.records.push(record);
    }

    pub fn finish(
        self,
        final_norm_f: f64,
        settings: SolverSettings,
        termination: TerminationReason,
    ) -> RunTrace {
        let last = self.iterates.last().expect("at least the initial iterate");
        let averaged = if self.sum_weight > 0.0 {
            last.with_values(&self.weighted_sum / self.sum_weight)
        } else {
            self.iterates[0].clone()
        };
        // Base-point norms pair with iterates[k]; the final iterate carries
        // final_norm_f.
        let mut best_idx = self.iterates.len() - 1;
        let mut best = final_norm_f;
        for (k, r) in self.records.iter().enumerate() {
            if r.norm_f < best {
                best = r.norm_f;
                best_idx = k;
            }
        }
        RunTrace {
            best_opnorm_iterate: self.iterates[best_idx].clone(),
            best_norm_f: best,
            averaged_iterate: averaged,
            last_iterate: last.clone(),
            records: self.records,
            iterates: self.iterates,
            initial_norm_f: self.initial_norm_f,
            final_norm_f,
            settings,
            seed: None,
            termination,
        }
    }
}
