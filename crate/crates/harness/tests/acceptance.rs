//! Acceptance suite: one test per quantitative criterion, each printing a
//! PASS/FAIL line. Run with `cargo test -p saddlebench-cli --test acceptance
//! -- --nocapture` to see the lines.
//!
//! The shared grid fixture runs {benchmark d∈{20,100} × L₂∈{1,100},
//! bilinear n=10, quadratic m=n=10} × {adaptive SOM I, II} × seeds {0,1,2}
//! at T = 1000 with invariant recording on.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use saddlebench_cli::config::{
    ExperimentConfig, LambdaRule, ProbeSettings, ProblemSpec, SolverEntry, SolverKind,
};
use saddlebench_cli::grid::{execute, run_cell, CellOutcome, Mode};
use saddlebench_core::core::{
    fd_jacobian_auto, monotonicity_probe, Point, SolverConfig, SomOption,
};
use saddlebench_core::metrics::{
    gap_surrogate, implicit_bound_check, rate_slope, BoundKind, GapProbeSet,
};
use saddlebench_core::problems::{make_benchmark, make_bilinear, random_initial_point};
use saddlebench_core::solvers::{
    audit_trace, run, run_extragradient, run_linesearch_som, run_ogda, LinesearchConfig,
    TerminationReason,
};

const CHECKPOINTS: [usize; 5] = [10, 50, 100, 500, 1000];

fn acceptance_config() -> ExperimentConfig {
    ExperimentConfig {
        problems: vec![
            ProblemSpec::Benchmark {
                d: 20,
                l2: 1.0,
                seed: 0,
            },
            ProblemSpec::Benchmark {
                d: 20,
                l2: 100.0,
                seed: 0,
            },
            ProblemSpec::Benchmark {
                d: 100,
                l2: 1.0,
                seed: 0,
            },
            ProblemSpec::Benchmark {
                d: 100,
                l2: 100.0,
                seed: 0,
            },
            ProblemSpec::Bilinear { n: 10, seed: 0 },
            ProblemSpec::Quadratic {
                m: 10,
                n: 10,
                seed: 0,
            },
        ],
        solvers: vec![
            SolverEntry {
                name: "adaptive-som-1".into(),
                kind: SolverKind::AdaptiveSom1 {
                    alpha: 0.25,
                    lambda: LambdaRule::Scaled(1.0),
                },
            },
            SolverEntry {
                name: "adaptive-som-2".into(),
                kind: SolverKind::AdaptiveSom2 {
                    alpha: 0.25,
                    lambda: LambdaRule::Scaled(0.1),
                },
            },
        ],
        max_iters: 1000,
        grad_tol: 1e-6,
        seeds: vec![0, 1, 2],
        output_dir: PathBuf::new(),
        probes: ProbeSettings { count: 64, seed: 0 },
        checkpoints: CHECKPOINTS.to_vec(),
        workers: 0,
        check_invariants: true,
    }
}

struct Fixture {
    cells: Vec<CellOutcome>,
    elapsed: Duration,
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let config = acceptance_config();
        let start = Instant::now();
        let mut cells = Vec::new();
        for problem in &config.problems {
            for solver in &config.solvers {
                for &seed in &config.seeds {
                    cells.push(
                        run_cell(problem, solver, seed, &config, true)
                            .expect("acceptance cell runs"),
                    );
                }
            }
        }
        Fixture {
            cells,
            elapsed: start.elapsed(),
        }
    })
}

fn verdict(criterion: &str, ok: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
}

/// Criterion 1: every per-iteration invariant holds on the full grid within
/// the runtime budget.
#[test]
fn criterion_1_invariant_suite() {
    let fx = fixture();
    assert_eq!(fx.cells.len(), 36);
    let mut failures = Vec::new();
    for cell in &fx.cells {
        if cell.trace.invariant_failures() > 0 {
            failures.push(format!(
                "{}: {} flag failures",
                cell.cell_id,
                cell.trace.invariant_failures()
            ));
        }
        let (problem, _, _) = grid_problem(&cell.cell_id, cell.effective_seed);
        let audit = audit_trace(&problem, &cell.trace);
        if !audit.is_empty() {
            failures.push(format!("{}: audit {:?}", cell.cell_id, audit));
        }
    }
    let within_budget = fx.elapsed <= Duration::from_secs(180);
    let ok = failures.is_empty() && within_budget;
    verdict(
        "1 (invariant suite)",
        ok,
        &format!(
            "36 runs, {} violations, grid time {:.1}s",
            failures.len(),
            fx.elapsed.as_secs_f64()
        ),
    );
    assert!(failures.is_empty(), "{failures:?}");
    assert!(
        within_budget,
        "grid took {:.1}s > 180s",
        fx.elapsed.as_secs_f64()
    );
}

/// Rebuilds the problem behind a fixture cell id (instances are pure
/// functions of their parameters).
fn grid_problem(cell_id: &str, eff_seed: u64) -> (saddlebench_core::SaddleProblem, usize, f64) {
    let config = acceptance_config();
    for spec in &config.problems {
        if cell_id.starts_with(&format!("{}__", spec.id())) {
            let (problem, _, _) = spec.instantiate(eff_seed).expect("instantiates");
            let (dim, l2) = match spec {
                ProblemSpec::Benchmark { d, l2, .. } => (*d, *l2),
                ProblemSpec::Bilinear { n, .. } => (2 * n, 0.0),
                ProblemSpec::Quadratic { m, n, .. } => (m + n, 0.0),
            };
            return (problem, dim, l2);
        }
    }
    panic!("unknown cell {cell_id}");
}

/// Criterion 2: fixed-λ theorem constants at every checkpoint on all
/// benchmark cells.
#[test]
fn criterion_2_thm61_constants() {
    let fx = fixture();
    let mut checked = 0;
    let mut failures = Vec::new();
    for cell in &fx.cells {
        if cell.solver_name != "adaptive-som-1" || !cell.problem_id.starts_with("benchmark") {
            continue;
        }
        let bound_kinds = [BoundKind::Boundedness, BoundKind::Thm61Norm];
        for kind in bound_kinds {
            let reports: Vec<_> = cell
                .bound_reports
                .iter()
                .filter(|r| r.kind == kind)
                .collect();
            assert!(!reports.is_empty(), "{}: no {kind:?} reports", cell.cell_id);
            for r in reports {
                checked += 1;
                if !r.satisfied {
                    failures.push(format!(
                        "{} {:?} at T'={}: {} > {}",
                        cell.cell_id, r.kind, r.t, r.observed, r.bound
                    ));
                }
            }
        }
    }
    let ok = failures.is_empty() && checked >= 12 * 2 * CHECKPOINTS.len();
    verdict(
        "2 (fixed-λ theorem constants)",
        ok,
        &format!("{checked} reports checked, {} failed", failures.len()),
    );
    assert!(failures.is_empty(), "{failures:?}");
}

/// Criterion 3: parameter-free theorem constants on quadratic instances and
/// the λ cap on the benchmark.
#[test]
fn criterion_3_thm62_constants() {
    let fx = fixture();
    let mut quad_reports = 0;
    let mut failures = Vec::new();
    for cell in &fx.cells {
        if cell.solver_name != "adaptive-som-2" {
            continue;
        }
        if cell.problem_id.starts_with("quadratic") {
            let reports: Vec<_> = cell
                .bound_reports
                .iter()
                .filter(|r| r.kind == BoundKind::Thm62Norm)
                .collect();
            assert!(!reports.is_empty(), "{}: no thm62 reports", cell.cell_id);
            for r in reports {
                quad_reports += 1;
                if !r.satisfied {
                    failures.push(format!(
                        "{} thm62 at T'={}: {} > {}",
                        cell.cell_id, r.t, r.observed, r.bound
                    ));
                }
            }
        }
        if cell.problem_id.starts_with("benchmark") {
            let (_, _, l2) = grid_problem(&cell.cell_id, cell.effective_seed);
            let lambda_init = cell
                .trace
                .settings
                .som_config()
                .expect("adaptive settings")
                .lambda_init;
            assert!(
                lambda_init < l2,
                "{}: λ₁ must underestimate L₂",
                cell.cell_id
            );
            for rec in &cell.trace.records {
                if rec.lambda > l2 * (1.0 + 1e-9) {
                    failures.push(format!(
                        "{} t={}: λ={} exceeds L₂={}",
                        cell.cell_id, rec.t, rec.lambda, l2
                    ));
                }
            }
        }
    }
    let ok = failures.is_empty() && quad_reports > 0;
    verdict(
        "3 (parameter-free theorem constants)",
        ok,
        &format!("{quad_reports} quadratic reports, benchmark λ capped by L₂"),
    );
    assert!(failures.is_empty(), "{failures:?}");
}

/// Criterion 4: log-log slope of the best-iterate operator norm over
/// t ∈ [100, 2000] on benchmark(d=100, L₂=100) for both options.
#[test]
fn criterion_4_rate_slope() {
    let problem = make_benchmark(50, 100.0, 0).expect("benchmark builds");
    let z1 = random_initial_point(50, 50, 0);
    let mut slopes = Vec::new();
    for option in [SomOption::OptionI, SomOption::OptionII] {
        let lambda = match option {
            SomOption::OptionI => 100.0,
            SomOption::OptionII => 10.0,
        };
        let config = SolverConfig::new(option, 0.25, lambda, 2000).with_grad_tol(0.0);
        let trace = run(&problem, &config, &z1).expect("run completes");
        let series: Vec<(f64, f64)> = trace
            .best_norm_f_series()
            .iter()
            .enumerate()
            .map(|(k, v)| ((k + 1) as f64, *v))
            .collect();
        let slope = rate_slope(&series, (100.0, 2000.0)).expect("window has points");
        slopes.push((option, slope));
    }
    // Diagnostic: the 1/T envelope is visible where the solution is within
    // reach of the step cap — the d=20, L₂=1 cell over a longer horizon.
    let small = make_benchmark(10, 1.0, 0).expect("small benchmark");
    let zs = random_initial_point(10, 10, 0);
    let cfg = SolverConfig::new(SomOption::OptionI, 0.25, 1.0, 20_000).with_grad_tol(1e-12);
    let small_trace = run(&small, &cfg, &zs).expect("long run");
    let small_series: Vec<(f64, f64)> = small_trace
        .best_norm_f_series()
        .iter()
        .enumerate()
        .map(|(k, v)| ((k + 1) as f64, *v))
        .collect();
    let small_slope = rate_slope(&small_series, (100.0, 20_000.0)).expect("window");

    let ok = slopes.iter().all(|(_, s)| *s <= -0.8);
    verdict(
        "4 (rate slope ≤ −0.8 on benchmark d=100, L₂=100)",
        ok,
        &format!(
            "measured {:?}; the instance's solution lies ~1e6 away ((L₂/2)‖x*‖A⁻ᵀx* scale), so \
             both options are step-limited to √(2α‖F‖/L₂) per iteration and the window shows \
             valley descent, not the 1/T envelope. Diagnostic: on benchmark d=20, L₂=1 the slope \
             over [100, 20000] is {small_slope:.3} (property holds where the solution is reachable)",
            slopes
                .iter()
                .map(|(o, s)| format!("{o:?}: {s:.3}"))
                .collect::<Vec<_>>()
        ),
    );
    assert!(
        small_slope <= -0.8,
        "diagnostic cell should show the envelope, got {small_slope}"
    );
    assert!(
        ok,
        "slopes {slopes:?} exceed −0.8: the adaptive step cap √(2α‖F‖/L₂) cannot cross the \
         ~1e6 distance to the solution within this window (λ-independent; the tracked λ \
         legitimately learns L₂ within a few steps)"
    );
}

/// Criterion 5: gap surrogate under the fixed-λ gap bound at every
/// checkpoint, plus brute-force agreement on a 2-D toy.
#[test]
fn criterion_5_gap_surrogate() {
    let fx = fixture();
    let mut gap_reports = 0;
    let mut failures = Vec::new();
    for cell in &fx.cells {
        if cell.solver_name != "adaptive-som-1" || !cell.problem_id.starts_with("benchmark") {
            continue;
        }
        let reports: Vec<_> = cell
            .bound_reports
            .iter()
            .filter(|r| r.kind == BoundKind::Thm61Gap)
            .collect();
        assert!(!reports.is_empty(), "{}: no gap reports", cell.cell_id);
        for r in reports {
            gap_reports += 1;
            if !r.satisfied {
                failures.push(format!(
                    "{} gap at T'={}: {} > {}",
                    cell.cell_id, r.t, r.observed, r.bound
                ));
            }
        }
    }

    // Brute-force re-summation on the 2-D bilinear toy.
    let problem = make_bilinear(1, 0);
    let z1 = Point::from_parts(&[0.8], &[-0.6]).expect("point");
    let config = SolverConfig::new(SomOption::OptionII, 0.25, 1.0, 3).with_grad_tol(0.0);
    let trace = run(&problem, &config, &z1).expect("toy run");
    let z_star = problem.known_solution().expect("origin solution");
    let probes = GapProbeSet::around_solution(z_star, &z1, 8, 1);
    let sum_eta: f64 = trace.records.iter().map(|r| r.eta).sum();
    let mut brute = f64::NEG_INFINITY;
    for probe in probes.probes() {
        let mut acc = 0.0;
        for k in 0..trace.records.len() {
            let theta = trace.records[k].eta / sum_eta;
            let f = problem.eval_operator(&trace.iterates[k + 1]);
            for i in 0..2 {
                acc += theta * f[i] * (trace.iterates[k + 1].values()[i] - probe.values()[i]);
            }
        }
        brute = brute.max(acc);
    }
    let surrogate = gap_surrogate(&trace, &problem, &probes).expect("surrogate");
    let brute_match = (surrogate - brute).abs() <= 1e-9 * (1.0 + brute.abs());

    let ok = failures.is_empty() && brute_match;
    verdict(
        "5 (gap surrogate)",
        ok,
        &format!(
            "{gap_reports} gap reports, brute-force delta {:.2e}",
            (surrogate - brute).abs()
        ),
    );
    assert!(failures.is_empty(), "{failures:?}");
    assert!(brute_match, "surrogate {surrogate} vs brute {brute}");
}

/// Criterion 6: finite-difference, monotonicity, and residual oracles on
/// every instance of the grid.
#[test]
fn criterion_6_oracle_checks() {
    let config = acceptance_config();
    let mut fd_checked = 0;
    let mut probes_checked = 0;
    for spec in &config.problems {
        for &seed in &config.seeds {
            let eff = spec.base_seed().wrapping_add(seed);
            let (problem, _, _) = spec.instantiate(eff).expect("instantiates");
            let mut draws = 0_u64;
            let mut points = 0;
            while points < 50 {
                let z = random_initial_point(
                    problem.dim_x(),
                    problem.dim_y(),
                    0x5EED_0000 + eff * 1000 + draws,
                );
                draws += 1;
                if z.x().norm() < 0.1 {
                    continue;
                }
                let analytic = problem.eval_jacobian(&z);
                let fd = fd_jacobian_auto(&problem, &z);
                let rel = (&fd - &analytic).norm() / analytic.norm();
                assert!(rel <= 1e-5, "{}: fd relative error {rel:.2e}", spec.id());
                points += 1;
                fd_checked += 1;
            }
            for pair in 0..100_u64 {
                let z1 = random_initial_point(problem.dim_x(), problem.dim_y(), 7000 + pair);
                let z2 = random_initial_point(problem.dim_x(), problem.dim_y(), 9000 + pair);
                let probe = monotonicity_probe(&problem, &z1, &z2);
                assert!(probe >= -1e-9, "{}: probe {probe}", spec.id());
                probes_checked += 1;
            }
        }
    }

    // Residuals within tolerance on every recorded iteration of the grid.
    let fx = fixture();
    let mut residuals = 0;
    for cell in &fx.cells {
        for rec in &cell.trace.records {
            let flags = rec.flags.expect("invariants recorded");
            assert_eq!(
                flags.residual_ok,
                Some(true),
                "{} t={}",
                cell.cell_id,
                rec.t
            );
            residuals += 1;
        }
    }
    verdict(
        "6 (oracle checks)",
        true,
        &format!("{fd_checked} fd points, {probes_checked} probes, {residuals} residuals"),
    );
}

/// Criterion 7: the implicit-bound lemma over 1e5 seeded random triples with
/// the premise enforced.
#[test]
fn criterion_7_implicit_bound_property() {
    let mut rng = ChaCha20Rng::seed_from_u64(0xA5A5);
    let mut violations = 0;
    for _ in 0..100_000 {
        let a = 10.0_f64.powf(rng.gen_range(-6.0..6.0));
        let b = 10.0_f64.powf(rng.gen_range(-6.0..3.0));
        // Premise region is [0, x_max] with √x_max the positive root of
        // x = a + b√x.
        let sqrt_max = (b + (b * b + 4.0 * a).sqrt()) / 2.0;
        let x = rng.gen_range(0.0..1.0) * sqrt_max * sqrt_max;
        let check = implicit_bound_check(a, b, x);
        if !check.premise_holds || !check.conclusion_holds {
            violations += 1;
        }
    }
    verdict(
        "7 (implicit bound lemma)",
        violations == 0,
        &format!("100000 triples, {violations} violations"),
    );
    assert_eq!(violations, 0);
}

/// Criterion 8: baseline sanity. Extragradient and the optimistic gradient
/// baseline converge on the bilinear game; the line-search baseline's
/// accepted steps satisfy the error condition; and the fixed-λ adaptive
/// method is compared against line search on the hard benchmark cell.
#[test]
fn criterion_8_baseline_sanity() {
    let bilinear = make_bilinear(10, 0);
    let z1 = random_initial_point(10, 10, 0);

    let eg = run_extragradient(&bilinear, None, 5000, 1e-6, &z1).expect("extragradient runs");
    let eg_ok = eg.termination == TerminationReason::Converged
        && eg.final_norm_f <= 1e-6 * eg.initial_norm_f;

    let og = run_ogda(&bilinear, None, 5000, 1e-6, &z1).expect("ogda runs");
    let og_ok = og.termination == TerminationReason::Converged
        && og.final_norm_f <= 1e-6 * og.initial_norm_f;

    // Line search on benchmark(d=100, L₂=100) down to 1e−8.
    let problem = make_benchmark(50, 100.0, 0).expect("benchmark builds");
    let zb = random_initial_point(50, 50, 0);
    let ls = run_linesearch_som(
        &problem,
        &LinesearchConfig {
            alpha_ls: 0.5,
            beta: 0.5,
            eta_init: 1.0,
            max_iters: 6000,
            grad_tol: 1e-8,
            check_invariants: false,
        },
        &zb,
    )
    .expect("line search runs");
    let ls_converged = ls.termination == TerminationReason::Converged;
    let mut eq6_ok = true;
    for k in 0..ls.records.len().saturating_sub(1) {
        let rec = &ls.records[k];
        let next = &ls.records[k + 1];
        if rec.eta * next.norm_e > 0.5 * rec.step_len * (1.0 + 1e-12) {
            eq6_ok = false;
        }
    }

    let ls_iters = ls.records.len();
    let som_budget = 3 * ls_iters;
    let som_config =
        SolverConfig::new(SomOption::OptionI, 0.25, 100.0, som_budget).with_grad_tol(1e-8);
    let som = run(&problem, &som_config, &zb).expect("adaptive run");
    let som_ok = som.termination == TerminationReason::Converged;

    let ok = eg_ok && og_ok && ls_converged && eq6_ok && som_ok;
    verdict(
        "8 (baseline sanity)",
        ok,
        &format!(
            "EG {} in {} iters; OGDA {} in {} iters; line-search converged={ls_converged} in \
             {ls_iters} iters with Eq.6 held={eq6_ok}; adaptive SOM-I within 3x budget ({som_budget}) \
             converged={som_ok} (reached ratio {:.2e}; the ~1e6-distant solution is unreachable \
             under the √(2α‖F‖/L₂) step cap)",
            if eg_ok { "converged" } else { "failed" },
            eg.records.len(),
            if og_ok { "converged" } else { "failed" },
            og.records.len(),
            som.final_norm_f / som.initial_norm_f
        ),
    );
    assert!(eg_ok, "extragradient did not reach 1e-6 in 5000 steps");
    assert!(og_ok, "ogda did not reach 1e-6 in 5000 steps");
    assert!(ls_converged, "line search did not reach 1e-8 in 6000 steps");
    assert!(
        eq6_ok,
        "an accepted line-search step violated the error condition"
    );
    assert!(
        som_ok,
        "adaptive SOM-I did not reach 1e-8 within {som_budget} iterations (3x line search): \
         its step cap √(2α‖F‖/L₂) cannot cross the ~1e6 distance to the solution at any λ, \
         while backtracking probes the local error and passes through the flat affine block"
    );
}

/// Criterion 9: two executions of the full acceptance grid produce
/// byte-identical trace CSVs.
#[test]
fn criterion_9_determinism() {
    let mut config = acceptance_config();
    config.workers = 0;
    let dir_a = tempfile::tempdir().expect("tempdir");
    let dir_b = tempfile::tempdir().expect("tempdir");
    execute(&config, dir_a.path(), Mode::Run).expect("first grid execution");
    execute(&config, dir_b.path(), Mode::Run).expect("second grid execution");

    let mut compared = 0;
    let traces_a = dir_a.path().join("traces");
    let mut names: Vec<_> = std::fs::read_dir(&traces_a)
        .expect("traces dir")
        .map(|e| e.expect("entry").file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 36);
    for name in names {
        let a = std::fs::read(traces_a.join(&name)).expect("read trace A");
        let b = std::fs::read(dir_b.path().join("traces").join(&name)).expect("read trace B");
        assert_eq!(a, b, "trace {name:?} differs between executions");
        compared += 1;
    }
    verdict(
        "9 (determinism)",
        true,
        &format!("{compared} trace files byte-identical"),
    );
}
