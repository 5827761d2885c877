//! Grid execution: instantiate each (problem, solver, seed) cell, run it,
//! grade it against the theorem bounds, and persist deterministic artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use saddlebench_core::core::{SaddleProblem, SomOption};
use saddlebench_core::metrics::{
    effective_l1, gap_reports, rate_slope, thm61_reports, thm62_reports, BoundReport, GapProbeSet,
};
use saddlebench_core::problems::{random_initial_point, RNG_NAME};
use saddlebench_core::solvers::{
    audit_trace, run, run_extragradient, run_linesearch_som, run_ogda, LinesearchConfig, RunTrace,
    TerminationReason,
};

use crate::config::{ExperimentConfig, ProblemSpec, SolverEntry, SolverKind};
use crate::io::trace_to_csv;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A finished cell before persistence.
pub struct CellOutcome {
    pub cell_id: String,
    pub problem_id: String,
    pub solver_name: String,
    pub seed: u64,
    pub effective_seed: u64,
    pub trace: RunTrace,
    pub bound_reports: Vec<BoundReport>,
    pub effective_l1: Option<f64>,
    pub rate_slope: Option<f64>,
}

/// Per-cell row of the results index.
#[derive(Debug, Clone, Serialize)]
pub struct IndexCell {
    pub problem: String,
    pub solver: String,
    pub seed: u64,
    pub effective_seed: u64,
    pub trace_csv: String,
    pub summary: String,
    pub instance: String,
    pub records: usize,
    pub termination: TerminationReason,
    pub invariant_failures: usize,
    pub bounds_satisfied: bool,
}

/// The results index written once after all cells finish.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentIndex {
    pub version: String,
    pub rng: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub cells: Vec<IndexCell>,
}

/// A violation found by verify mode, attributed to its cell.
#[derive(Debug, Clone, Serialize)]
pub struct NamedViolation {
    pub cell: String,
    pub t: Option<usize>,
    pub check: String,
    pub observed: f64,
    pub bound: f64,
}

pub struct GridOutput {
    pub index: ExperimentIndex,
    pub violations: Vec<NamedViolation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Run,
    Verify,
}

#[derive(Serialize)]
struct TallyEntry {
    checked: usize,
    failed: usize,
}

#[derive(Serialize)]
struct CellSummary<'a> {
    problem: &'a str,
    solver: &'a str,
    seed: u64,
    effective_seed: u64,
    rng: &'a str,
    config_hash: &'a str,
    settings: &'a saddlebench_core::solvers::SolverSettings,
    termination: TerminationReason,
    iterations: usize,
    initial_norm_f: f64,
    final_norm_f: f64,
    best_norm_f: f64,
    final_ratio: f64,
    sum_eta: f64,
    backtracks_total: u64,
    invariant_failures: usize,
    invariant_tally: BTreeMap<&'static str, TallyEntry>,
    bound_reports: &'a [BoundReport],
    bounds_satisfied: bool,
    rate_slope: Option<f64>,
    effective_l1: Option<f64>,
}

/// Runs one grid cell. Pure given its inputs: the instance, the initial
/// iterate, and every solver decision are functions of the seeds alone.
pub fn run_cell(
    problem_spec: &ProblemSpec,
    solver: &SolverEntry,
    seed: u64,
    config: &ExperimentConfig,
    check_invariants: bool,
) -> Result<CellOutcome, CliError> {
    let effective_seed = problem_spec.base_seed().wrapping_add(seed);
    let (problem, _json, coupling_opnorm) = problem_spec
        .instantiate(effective_seed)
        .map_err(|e| CliError::Run(format!("instance generation failed: {e}")))?;
    run_cell_on(
        &problem,
        coupling_opnorm,
        problem_spec.id(),
        solver,
        seed,
        effective_seed,
        config,
        check_invariants,
    )
}

/// Cell body on an already-instantiated problem (grid execution shares
/// instances across the solver axis).
#[allow(clippy::too_many_arguments)]
pub fn run_cell_on(
    problem: &SaddleProblem,
    coupling_opnorm: Option<f64>,
    problem_id: String,
    solver: &SolverEntry,
    seed: u64,
    effective_seed: u64,
    config: &ExperimentConfig,
    check_invariants: bool,
) -> Result<CellOutcome, CliError> {
    let z_init = random_initial_point(problem.dim_x(), problem.dim_y(), effective_seed);
    let run_err = |e: &dyn std::fmt::Display| {
        CliError::Run(format!(
            "{problem_id}/{}/seed{seed}: {e}",
            solver.name.as_str()
        ))
    };

    let trace = match &solver.kind {
        SolverKind::AdaptiveSom1 { .. } | SolverKind::AdaptiveSom2 { .. } => {
            let som = solver
                .kind
                .som_config(problem, config.max_iters, config.grad_tol, check_invariants)
                .expect("adaptive kinds produce configs");
            run(problem, &som, &z_init).map_err(|e| run_err(&e))?
        }
        SolverKind::Extragradient { gamma } => {
            run_extragradient(problem, *gamma, config.max_iters, config.grad_tol, &z_init)
                .map_err(|e| run_err(&e))?
        }
        SolverKind::Ogda { gamma } => {
            run_ogda(problem, *gamma, config.max_iters, config.grad_tol, &z_init)
                .map_err(|e| run_err(&e))?
        }
        SolverKind::LinesearchSom {
            alpha_ls,
            beta,
            eta_init,
        } => {
            let ls = LinesearchConfig {
                alpha_ls: *alpha_ls,
                beta: *beta,
                eta_init: *eta_init,
                max_iters: config.max_iters,
                grad_tol: config.grad_tol,
                check_invariants,
            };
            run_linesearch_som(problem, &ls, &z_init).map_err(|e| run_err(&e))?
        }
    }
    .with_seed(effective_seed);

    let mut bound_reports = Vec::new();
    if let Some(som) = trace.settings.som_config() {
        let l2 = problem.lipschitz_hessian();
        match som.option {
            SomOption::OptionI => {
                // The printed theorem constants are the α = 1/4, λ = L₂
                // instantiation; grade only runs configured that way.
                if som.alpha == 0.25
                    && l2 > 0.0
                    && som.lambda_init == l2
                    && problem.known_solution().is_some()
                {
                    bound_reports.extend(
                        thm61_reports(&trace, problem, &config.checkpoints)
                            .map_err(|e| run_err(&e))?,
                    );
                    let probes = GapProbeSet::around_solution(
                        problem.known_solution().expect("checked"),
                        &z_init,
                        config.probes.count,
                        config.probes.seed.wrapping_add(effective_seed),
                    );
                    bound_reports.extend(
                        gap_reports(&trace, problem, &probes, &config.checkpoints)
                            .map_err(|e| run_err(&e))?,
                    );
                }
            }
            SomOption::OptionII => {
                if let (Some(l1), Some(_)) =
                    (problem.lipschitz_gradient(), problem.known_solution())
                {
                    let cap = som.lambda_init.max(l2);
                    bound_reports.extend(
                        thm62_reports(&trace, problem, l1, cap, &config.checkpoints)
                            .map_err(|e| run_err(&e))?,
                    );
                }
            }
        }
    }

    let slope = {
        let series: Vec<(f64, f64)> = trace
            .best_norm_f_series()
            .into_iter()
            .enumerate()
            .map(|(k, v)| ((k + 1) as f64, v))
            .collect();
        rate_slope(&series, (100.0, config.max_iters as f64)).ok()
    };

    let eff_l1 = coupling_opnorm.and_then(|a_norm| {
        problem.known_solution().map(|z_star| {
            effective_l1(
                a_norm,
                problem.lipschitz_hessian(),
                z_init.distance(z_star),
                z_star.norm(),
            )
        })
    });

    Ok(CellOutcome {
        cell_id: format!("{problem_id}__{}__s{seed}", solver.name),
        problem_id,
        solver_name: solver.name.clone(),
        seed,
        effective_seed,
        trace,
        bound_reports,
        effective_l1: eff_l1,
        rate_slope: slope,
    })
}

fn summarize<'a>(outcome: &'a CellOutcome, config_hash: &'a str) -> CellSummary<'a> {
    let trace = &outcome.trace;
    let mut tally: BTreeMap<&'static str, TallyEntry> = BTreeMap::new();
    for rec in &trace.records {
        if let Some(flags) = &rec.flags {
            for (name, v) in flags.named() {
                if let Some(ok) = v {
                    let entry = tally.entry(name).or_insert(TallyEntry {
                        checked: 0,
                        failed: 0,
                    });
                    entry.checked += 1;
                    if !ok {
                        entry.failed += 1;
                    }
                }
            }
        }
    }
    let final_ratio = if trace.initial_norm_f > 0.0 {
        (trace.final_norm_f / trace.initial_norm_f).powi(2)
    } else {
        1.0
    };
    CellSummary {
        problem: &outcome.problem_id,
        solver: &outcome.solver_name,
        seed: outcome.seed,
        effective_seed: outcome.effective_seed,
        rng: RNG_NAME,
        config_hash,
        settings: &trace.settings,
        termination: trace.termination,
        iterations: trace.records.len(),
        initial_norm_f: trace.initial_norm_f,
        final_norm_f: trace.final_norm_f,
        best_norm_f: trace.best_norm_f,
        final_ratio,
        sum_eta: trace.records.iter().map(|r| r.eta).sum(),
        backtracks_total: trace.records.iter().map(|r| u64::from(r.backtracks)).sum(),
        invariant_failures: trace.invariant_failures(),
        invariant_tally: tally,
        bound_reports: &outcome.bound_reports,
        bounds_satisfied: outcome.bound_reports.iter().all(|r| r.satisfied),
        rate_slope: outcome.rate_slope,
        effective_l1: outcome.effective_l1,
    }
}

/// Executes the whole grid, writing per-run CSV traces, JSON summaries,
/// archived instances, and the results index under `out_dir`.
///
/// In verify mode invariant recording is forced on and every recorded flag,
/// audit finding, and bound report feeds the violation list.
pub fn execute(
    config: &ExperimentConfig,
    out_dir: &Path,
    mode: Mode,
) -> Result<GridOutput, CliError> {
    config.validate()?;
    let check_invariants = config.check_invariants || mode == Mode::Verify;
    let config_hash = config.config_hash();

    let traces_dir = out_dir.join("traces");
    let summaries_dir = out_dir.join("summaries");
    let instances_dir = out_dir.join("instances");
    for dir in [&traces_dir, &summaries_dir, &instances_dir] {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }

    // Instances are shared across the solver axis; build them up front so
    // each archive file is written exactly once.
    let mut instances: BTreeMap<(usize, u64), (SaddleProblem, Option<f64>, PathBuf)> =
        BTreeMap::new();
    for (p_idx, spec) in config.problems.iter().enumerate() {
        for &seed in &config.seeds {
            let eff = spec.base_seed().wrapping_add(seed);
            let (problem, json, opnorm) = spec
                .instantiate(eff)
                .map_err(|e| CliError::Run(format!("{}: {e}", spec.id())))?;
            let path = instances_dir.join(format!("{}__s{seed}.json", spec.id()));
            fs::write(&path, &json)
                .map_err(|e| CliError::Run(format!("write {}: {e}", path.display())))?;
            instances.insert((p_idx, seed), (problem, opnorm, path));
        }
    }

    let cells: Vec<(usize, usize, u64)> = config
        .problems
        .iter()
        .enumerate()
        .flat_map(|(p, _)| {
            config
                .solvers
                .iter()
                .enumerate()
                .flat_map(move |(s, _)| config.seeds.iter().map(move |&seed| (p, s, seed)))
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;

    let results: Vec<Result<(IndexCell, Vec<NamedViolation>), CliError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(p_idx, s_idx, seed)| {
                let spec = &config.problems[p_idx];
                let solver = &config.solvers[s_idx];
                let (problem, opnorm, instance_path) =
                    instances.get(&(p_idx, seed)).expect("prebuilt instance");
                let outcome = run_cell_on(
                    problem,
                    *opnorm,
                    spec.id(),
                    solver,
                    seed,
                    spec.base_seed().wrapping_add(seed),
                    config,
                    check_invariants,
                )?;

                let trace_rel = format!("traces/{}.csv", outcome.cell_id);
                let summary_rel = format!("summaries/{}.json", outcome.cell_id);
                fs::write(out_dir.join(&trace_rel), trace_to_csv(&outcome.trace))
                    .map_err(|e| CliError::Run(format!("write trace: {e}")))?;
                let summary = summarize(&outcome, &config_hash);
                let summary_json = serde_json::to_string_pretty(&summary)
                    .map_err(|e| CliError::Run(format!("summary serialize: {e}")))?;
                fs::write(out_dir.join(&summary_rel), summary_json)
                    .map_err(|e| CliError::Run(format!("write summary: {e}")))?;

                let mut violations = Vec::new();
                if mode == Mode::Verify {
                    for v in audit_trace(problem, &outcome.trace) {
                        violations.push(NamedViolation {
                            cell: outcome.cell_id.clone(),
                            t: v.t,
                            check: v.check,
                            observed: v.observed,
                            bound: v.bound,
                        });
                    }
                    for report in &outcome.bound_reports {
                        if !report.satisfied {
                            violations.push(NamedViolation {
                                cell: outcome.cell_id.clone(),
                                t: Some(report.t),
                                check: format!("bound_{:?}", report.kind).to_lowercase(),
                                observed: report.observed,
                                bound: report.bound,
                            });
                        }
                    }
                }

                let instance_rel = instance_path
                    .strip_prefix(out_dir)
                    .unwrap_or(instance_path)
                    .to_string_lossy()
                    .into_owned();
                let row = IndexCell {
                    problem: outcome.problem_id.clone(),
                    solver: outcome.solver_name.clone(),
                    seed,
                    effective_seed: outcome.effective_seed,
                    trace_csv: trace_rel,
                    summary: summary_rel,
                    instance: instance_rel,
                    records: outcome.trace.records.len(),
                    termination: outcome.trace.termination,
                    invariant_failures: outcome.trace.invariant_failures(),
                    bounds_satisfied: outcome.bound_reports.iter().all(|r| r.satisfied),
                };
                Ok((row, violations))
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(results.len());
    let mut violations = Vec::new();
    for r in results {
        let (row, mut v) = r?;
        rows.push(row);
        violations.append(&mut v);
    }
    rows.sort_by(|a, b| (&a.problem, &a.solver, a.seed).cmp(&(&b.problem, &b.solver, b.seed)));
    violations.sort_by(|a, b| (&a.cell, a.t).cmp(&(&b.cell, b.t)));

    let index = ExperimentIndex {
        version: VERSION.to_string(),
        rng: RNG_NAME.to_string(),
        config_hash,
        config: config.canonical(),
        cells: rows,
    };
    let index_json = serde_json::to_string_pretty(&index)
        .map_err(|e| CliError::Run(format!("index serialize: {e}")))?;
    fs::write(out_dir.join("index.json"), index_json)
        .map_err(|e| CliError::Run(format!("write index: {e}")))?;

    Ok(GridOutput { index, violations })
}
