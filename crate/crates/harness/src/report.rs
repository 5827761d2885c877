//! Plot-ready aggregation of finished runs: one tidy CSV per problem and
//! metric with columns `solver,seed,t,value`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::io::parse_trace_csv;
use crate::CliError;

pub struct ReportStats {
    /// Rows written per output file, keyed by file name.
    pub rows: BTreeMap<String, usize>,
}

/// Reads `index.json` under `results_dir`, checks its integrity (config
/// hash, referenced files), and writes `reports/<problem>__opnorm_ratio.csv`
/// aggregations.
pub fn run_report(results_dir: &Path) -> Result<ReportStats, CliError> {
    let index_path = results_dir.join("index.json");
    let index_text = fs::read_to_string(&index_path)
        .map_err(|e| CliError::Report(format!("missing index {}: {e}", index_path.display())))?;
    let index: serde_json::Value = serde_json::from_str(&index_text)
        .map_err(|e| CliError::Report(format!("index parse error: {e}")))?;

    let stored_hash = index
        .get("config_hash")
        .and_then(|v| v.as_str())
        .ok_or_else(|| CliError::Report("index has no config_hash".into()))?;
    let config = index
        .get("config")
        .ok_or_else(|| CliError::Report("index has no config echo".into()))?;
    let config_json = serde_json::to_string(
        &serde_json::from_value::<crate::config::ExperimentConfig>(config.clone())
            .map_err(|e| CliError::Report(format!("index config malformed: {e}")))?
            .canonical(),
    )
    .map_err(|e| CliError::Report(format!("config serialize: {e}")))?;
    let recomputed = format!("{:016x}", crate::io::fnv1a64(config_json.as_bytes()));
    if recomputed != stored_hash {
        return Err(CliError::Report(format!(
            "config hash mismatch: index says {stored_hash}, config hashes to {recomputed}"
        )));
    }

    let cells: Vec<ExperimentIndexCellView> = index
        .get("cells")
        .and_then(|v| v.as_array())
        .ok_or_else(|| CliError::Report("index has no cells".into()))?
        .iter()
        .map(|c| {
            Ok(ExperimentIndexCellView {
                problem: str_field(c, "problem")?,
                solver: str_field(c, "solver")?,
                seed: c
                    .get("seed")
                    .and_then(|v| v.as_u64())
                    .ok_or_else(|| CliError::Report("cell missing seed".into()))?,
                trace_csv: str_field(c, "trace_csv")?,
            })
        })
        .collect::<Result<_, CliError>>()?;

    let reports_dir = results_dir.join("reports");
    fs::create_dir_all(&reports_dir)
        .map_err(|e| CliError::Report(format!("cannot create reports dir: {e}")))?;

    // Group series by problem, preserving index order within groups.
    type Series = Vec<(usize, f64)>;
    let mut grouped: BTreeMap<String, Vec<(String, u64, Series)>> = BTreeMap::new();
    for cell in &cells {
        let trace_path = results_dir.join(&cell.trace_csv);
        let text = fs::read_to_string(&trace_path).map_err(|_| {
            CliError::Report(format!(
                "trace file referenced by index is missing: {}",
                trace_path.display()
            ))
        })?;
        let series = parse_trace_csv(&text)
            .ok_or_else(|| CliError::Report(format!("malformed trace {}", trace_path.display())))?;
        let base = series.first().map(|(_, nf)| *nf).unwrap_or(0.0);
        let ratio: Vec<(usize, f64)> = series
            .iter()
            .map(|(t, nf)| {
                let r = if base > 0.0 {
                    (nf / base) * (nf / base)
                } else {
                    1.0
                };
                (*t, r)
            })
            .collect();
        grouped.entry(cell.problem.clone()).or_default().push((
            cell.solver.clone(),
            cell.seed,
            ratio,
        ));
    }

    let mut stats = ReportStats {
        rows: BTreeMap::new(),
    };
    for (problem, series_list) in grouped {
        let file_name = format!("{problem}__opnorm_ratio.csv");
        let mut out = String::from("solver,seed,t,value\n");
        let mut rows = 0;
        for (solver, seed, series) in series_list {
            for (t, value) in series {
                let _ = writeln!(out, "{solver},{seed},{t},{value:?}");
                rows += 1;
            }
        }
        fs::write(reports_dir.join(&file_name), out)
            .map_err(|e| CliError::Report(format!("write report: {e}")))?;
        stats.rows.insert(file_name, rows);
    }
    Ok(stats)
}

struct ExperimentIndexCellView {
    problem: String,
    solver: String,
    seed: u64,
    trace_csv: String,
}

fn str_field(v: &serde_json::Value, name: &str) -> Result<String, CliError> {
    v.get(name)
        .and_then(|f| f.as_str())
        .map(str::to_string)
        .ok_or_else(|| CliError::Report(format!("cell missing field {name}")))
}
