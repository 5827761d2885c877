use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use saddlebench_cli::config::ExperimentConfig;
use saddlebench_cli::grid::{execute, GridOutput, Mode};
use saddlebench_cli::report::run_report;
use saddlebench_cli::CliError;

/// Benchmark harness for adaptive second-order optimistic min-max solvers.
#[derive(Parser)]
#[command(name = "saddlebench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GridArgs {
    /// Grid definition (JSON). Omit to use the built-in desk-scale grid.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid cells (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Added to every grid seed.
    #[arg(long, default_value_t = 0)]
    seed_offset: u64,
    /// Config overrides as dotted key=value pairs (e.g. max_iters=500).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the grid and write traces, summaries, and the results index.
    Run(#[command(flatten)] GridArgs),
    /// Execute the grid with invariant recording forced on and fail on any
    /// violated inequality or theorem bound.
    Verify(#[command(flatten)] GridArgs),
    /// Aggregate a finished results directory into plot-ready CSVs.
    Report {
        /// Directory containing index.json.
        results_dir: PathBuf,
    },
}

fn load_config(args: &GridArgs) -> Result<ExperimentConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json_with_overrides(&text, &args.overrides)?
        }
        None => {
            let base = serde_json::to_string(&ExperimentConfig::default_grid())
                .expect("default grid serializes");
            ExperimentConfig::from_json_with_overrides(&base, &args.overrides)?
        }
    };
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    config.add_seed_offset(args.seed_offset);
    if config.output_dir.as_os_str().is_empty() {
        return Err(CliError::Config(
            "no output directory: set output_dir in the config or pass --out".into(),
        ));
    }
    Ok(config)
}

fn cmd_run(args: &GridArgs) -> Result<(), CliError> {
    let config = load_config(args)?;
    let out_dir = config.output_dir.clone();
    let GridOutput { index, .. } = execute(&config, &out_dir, Mode::Run)?;
    println!(
        "ran {} cells -> {} (config hash {})",
        index.cells.len(),
        out_dir.display(),
        index.config_hash
    );
    Ok(())
}

fn cmd_verify(args: &GridArgs) -> Result<bool, CliError> {
    let config = load_config(args)?;
    let out_dir = config.output_dir.clone();
    let GridOutput { index, violations } = execute(&config, &out_dir, Mode::Verify)?;
    let bounds_checked: usize = index.cells.len();
    if violations.is_empty() {
        println!(
            "verified {bounds_checked} cells: all per-iteration invariants and bound reports hold"
        );
        return Ok(true);
    }
    println!(
        "{} violation(s) across {} cells:",
        violations.len(),
        bounds_checked
    );
    println!(
        "{:<52} {:>6} {:<26} {:>14} {:>14}",
        "run", "t", "invariant", "observed", "bound"
    );
    let num = |v: f64| {
        if v.is_nan() {
            "-".to_string()
        } else {
            format!("{v:.6e}")
        }
    };
    for v in &violations {
        println!(
            "{:<52} {:>6} {:<26} {:>14} {:>14}",
            v.cell,
            v.t.map_or("-".to_string(), |t| t.to_string()),
            v.check,
            num(v.observed),
            num(v.bound)
        );
    }
    Ok(false)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<bool, CliError> = match &cli.command {
        Command::Run(args) => cmd_run(args).map(|()| true),
        Command::Verify(args) => cmd_verify(args),
        Command::Report { results_dir } => run_report(results_dir).map(|stats| {
            for (file, rows) in &stats.rows {
                println!("wrote reports/{file}: {rows} rows");
            }
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
