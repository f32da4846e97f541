use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::ExperimentResult;
use crate::error::Result;

pub const CSV_HEADER: &str =
    "round,seed,strategy,accuracy,n_labeled,n_pseudo,pseudo_precision,mean_pclean,wall_ms";

/// `<strategy>_seed<experiment seed>`.
pub fn report_file_stem(result: &ExperimentResult) -> String {
    format!("{}_seed{}", result.config.strategy, result.config.seed)
}

/// One row per (run, round), runs in configured seed order. Missing values
/// are left empty.
pub fn csv_report(result: &ExperimentResult) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for run in &result.runs {
        for r in &run.rounds {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.round,
                r.seed,
                r.strategy,
                r.accuracy,
                r.n_labeled,
                r.n_pseudo,
                opt(r.pseudo_precision),
                opt(r.pclean_mean),
                r.wall_ms
            )
            .expect("writing to a String cannot fail");
        }
    }
    out
}

/// Resolved configuration, per-round mean and std, and every run's reports.
pub fn json_summary(result: &ExperimentResult) -> serde_json::Value {
    json!({
        "config": result.config,
        "summary": result.summary,
        "runs": result.runs,
    })
}

/// Writes the CSV, the JSON summary and any round checkpoints into `dir`.
/// Returns the written paths.
pub fn write_reports(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let stem = report_file_stem(result);
    let csv_path = dir.join(format!("{stem}.csv"));
    fs::write(&csv_path, csv_report(result))?;
    let json_path = dir.join(format!("{stem}.summary.json"));
    let mut text = serde_json::to_string_pretty(&json_summary(result))?;
    text.push('\n');
    fs::write(&json_path, text)?;
    let mut written = vec![csv_path, json_path];
    for run in &result.runs {
        for (round, bytes) in run.init_checkpoints.iter().enumerate() {
            let path = dir.join(format!("{stem}_run{}_round{round}_init.dpms", run.seed));
            fs::write(&path, bytes)?;
            written.push(path);
        }
    }
    Ok(written)
}
