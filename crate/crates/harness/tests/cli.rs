//! End-to-end exercises of the `saddlebench` binary: exit codes, file
//! layout, determinism, and report aggregation.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn saddlebench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saddlebench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn minimal_config(dir: &Path, max_iters: usize) -> String {
    let path = dir.join("config.json");
    let json = format!(
        r#"{{
  "problems": [{{"kind": "bilinear", "n": 4}}],
  "solvers": [{{"name": "adaptive-som-2", "algorithm": "adaptive_som_2"}}],
  "max_iters": {max_iters},
  "grad_tol": 0.0,
  "seeds": [0],
  "output_dir": "{}"
}}"#,
        dir.join("out").display()
    );
    fs::write(&path, json).expect("write config");
    path.to_string_lossy().into_owned()
}

#[test]
fn run_writes_trace_rows_and_index() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = minimal_config(dir.path(), 10);
    let out = saddlebench(&["run", "--config", &config]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let trace = fs::read_to_string(
        dir.path()
            .join("out/traces/bilinear-n4__adaptive-som-2__s0.csv"),
    )
    .expect("trace exists");
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,eta,lambda,norm_F,norm_e,step_len,residual"
    );
    assert_eq!(lines.count(), 10, "one row per iteration");

    let index: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/index.json")).unwrap())
            .expect("index parses");
    assert_eq!(index["cells"].as_array().unwrap().len(), 1);
    assert_eq!(index["cells"][0]["records"], 10);
    assert!(dir
        .path()
        .join("out")
        .join(index["cells"][0]["instance"].as_str().unwrap())
        .exists());
}

#[test]
fn desk_scale_grid_produces_48_traces() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("out");
    let out = saddlebench(&[
        "run",
        "--out",
        out_dir.to_str().unwrap(),
        "--workers",
        "2",
        "--override",
        "max_iters=5",
        "--override",
        "checkpoints=[2,5]",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let count = fs::read_dir(out_dir.join("traces")).unwrap().count();
    assert_eq!(count, 48, "4 problems x 4 solvers x 3 seeds");

    // Cell outputs are independent of the worker count.
    let serial_dir = dir.path().join("serial");
    let serial = saddlebench(&[
        "run",
        "--out",
        serial_dir.to_str().unwrap(),
        "--workers",
        "1",
        "--override",
        "max_iters=5",
        "--override",
        "checkpoints=[2,5]",
    ]);
    assert!(serial.status.success());
    for entry in fs::read_dir(out_dir.join("traces")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(out_dir.join("traces").join(&name)).unwrap(),
            fs::read(serial_dir.join("traces").join(&name)).unwrap(),
            "trace {name:?} depends on worker count"
        );
    }
}

#[test]
fn rerun_with_identical_config_is_byte_identical() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = minimal_config(dir.path(), 25);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let res = saddlebench(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
        assert!(res.status.success());
    }
    let name = "traces/bilinear-n4__adaptive-som-2__s0.csv";
    assert_eq!(
        fs::read(out_a.join(name)).unwrap(),
        fs::read(out_b.join(name)).unwrap()
    );
    // The index is byte-identical too: it stores relative paths and a
    // canonical config.
    assert_eq!(
        fs::read(out_a.join("index.json")).unwrap(),
        fs::read(out_b.join("index.json")).unwrap()
    );
}

#[test]
fn seed_offset_shifts_effective_seeds() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = minimal_config(dir.path(), 5);
    let out = saddlebench(&[
        "run",
        "--config",
        &config,
        "--out",
        dir.path().join("off").to_str().unwrap(),
        "--seed-offset",
        "7",
    ]);
    assert!(out.status.success());
    assert!(dir
        .path()
        .join("off/traces/bilinear-n4__adaptive-som-2__s7.csv")
        .exists());
}

#[test]
fn verify_exits_zero_on_clean_grid() {
    let dir = tempfile::tempdir().expect("tempdir");
    // Stop at a meaningful tolerance: past the floating-point floor the
    // curvature competitor 2‖e‖/‖Δz‖² divides noise by noise.
    let config = minimal_config(dir.path(), 40);
    let out = saddlebench(&[
        "verify",
        "--config",
        &config,
        "--override",
        "grad_tol=1e-10",
    ]);
    assert!(
        out.status.success(),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("all per-iteration invariants"), "{text}");
}

#[test]
fn verify_exits_one_and_prints_table_on_violation() {
    let dir = tempfile::tempdir().expect("tempdir");
    // A disabled stopping rule drives the affine run deep into the
    // floating-point floor, where the curvature tracker provably violates
    // its cap; verify must catch it and report the offending steps.
    let config = minimal_config(dir.path(), 40);
    let out = saddlebench(&["verify", "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("violation"), "{text}");
    assert!(text.contains("lambda_cap"), "{text}");
    assert!(text.contains("bilinear-n4__adaptive-som-2__s0"), "{text}");
}

#[test]
fn empty_grid_is_config_error_exit_2() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("config.json");
    fs::write(
        &path,
        r#"{"problems": [], "solvers": [], "max_iters": 5, "seeds": [], "output_dir": "o"}"#,
    )
    .unwrap();
    let out = saddlebench(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_solver_parameter_aborts_with_exit_3() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("config.json");
    // α = 0.4 is out of range for the parameter-free option (needs ≤ 1/3).
    let json = format!(
        r#"{{
  "problems": [{{"kind": "bilinear", "n": 3}}],
  "solvers": [{{"name": "bad", "algorithm": "adaptive_som_2", "alpha": 0.4}}],
  "max_iters": 5,
  "seeds": [0],
  "output_dir": "{}"
}}"#,
        dir.path().join("out").display()
    );
    fs::write(&path, json).unwrap();
    let out = saddlebench(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn report_aggregates_and_conserves_rows() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("out");
    let res = saddlebench(&[
        "run",
        "--out",
        out_dir.to_str().unwrap(),
        "--override",
        "max_iters=8",
        "--override",
        r#"problems=[{"kind":"bilinear","n":3},{"kind":"quadratic","m":2,"n":2}]"#,
        "--override",
        r#"solvers=[{"name":"adaptive-som-1","algorithm":"adaptive_som_1"},{"name":"extragradient","algorithm":"extragradient"}]"#,
        "--override",
        "seeds=[0,1]",
        "--override",
        "grad_tol=0.0",
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    let rep = saddlebench(&["report", out_dir.to_str().unwrap()]);
    assert!(
        rep.status.success(),
        "{}",
        String::from_utf8_lossy(&rep.stderr)
    );

    // Conservation: aggregated row count equals the sum of per-trace record
    // counts for each problem.
    let index: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("index.json")).unwrap()).unwrap();
    for problem in ["bilinear-n3", "quadratic-m2-n2"] {
        let expected: u64 = index["cells"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|c| c["problem"] == problem)
            .map(|c| c["records"].as_u64().unwrap())
            .sum();
        let report =
            fs::read_to_string(out_dir.join(format!("reports/{problem}__opnorm_ratio.csv")))
                .expect("report exists");
        let mut lines = report.lines();
        assert_eq!(lines.next().unwrap(), "solver,seed,t,value");
        assert_eq!(lines.count() as u64, expected);
        // Both solver series appear.
        assert!(report.contains("adaptive-som-1,"));
        assert!(report.contains("extragradient,"));
    }

    // The initial entry of each series is exactly 1.
    let report = fs::read_to_string(out_dir.join("reports/bilinear-n3__opnorm_ratio.csv")).unwrap();
    let first_row: Vec<&str> = report.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first_row[2], "1");
    assert_eq!(first_row[3].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn report_on_missing_trace_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = minimal_config(dir.path(), 5);
    let res = saddlebench(&["run", "--config", &config]);
    assert!(res.status.success());

    let victim = dir
        .path()
        .join("out/traces/bilinear-n4__adaptive-som-2__s0.csv");
    fs::remove_file(&victim).unwrap();
    let rep = saddlebench(&["report", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(rep.status.code(), Some(2));
    let err = String::from_utf8_lossy(&rep.stderr);
    assert!(
        err.contains("bilinear-n4__adaptive-som-2__s0.csv"),
        "error should name the missing file: {err}"
    );
}

#[test]
fn report_on_missing_index_exits_2() {
    let dir = tempfile::tempdir().expect("tempdir");
    let rep = saddlebench(&["report", dir.path().to_str().unwrap()]);
    assert_eq!(rep.status.code(), Some(2));
}
