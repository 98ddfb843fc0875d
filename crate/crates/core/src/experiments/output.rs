//! Artifact writers. Every file embeds the resolved config for provenance:
//! JSON reports carry it as a `config` field, CSV files as a leading
//! `# config: …` comment line. Formatting goes through Rust's shortest
//! round-trip float printing, so identical results are identical bytes.

use super::{CompareOutcome, ConvergenceConfig, ConvergenceTable, ExperimentConfig, ExperimentError};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Provenance covers exactly what determines the numbers: execution details
/// (worker-pool size, output location) are stripped so identical experiments
/// give identical artifacts no matter where or how parallel they ran.
fn provenance_compare(cfg: &ExperimentConfig) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.threads = None;
    c.output_dir = None;
    c
}

fn provenance_convergence(cfg: &ConvergenceConfig) -> ConvergenceConfig {
    let mut c = cfg.clone();
    c.threads = None;
    c.output_dir = None;
    c
}

fn config_line<T: serde::Serialize>(cfg: &T) -> Result<String, ExperimentError> {
    serde_json::to_string(cfg).map_err(|e| ExperimentError::Config(e.to_string()))
}

/// Writes `compare_seed<g>.csv` (grid join of the mean trajectory and the ODE)
/// and `report_seed<g>.json` per outcome.
pub fn write_compare_artifacts(
    outcomes: &[CompareOutcome],
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<Vec<std::path::PathBuf>, ExperimentError> {
    std::fs::create_dir_all(dir)?;
    let cfg = provenance_compare(cfg);
    let cfg_line = config_line(&cfg)?;
    let mut written = Vec::new();
    for outcome in outcomes {
        let seed = outcome.summary.graph_seed;
        let csv_path = dir.join(format!("compare_seed{seed}.csv"));
        {
            let mut w = BufWriter::new(File::create(&csv_path)?);
            writeln!(w, "# config: {cfg_line}")?;
            write!(w, "t")?;
            for l in &outcome.labels {
                write!(w, ",mean_xbar_{l}")?;
            }
            for l in &outcome.labels {
                write!(w, ",u_{l}")?;
            }
            writeln!(w, ",err_l1")?;
            for (idx, &t) in outcome.times.iter().enumerate() {
                write!(w, "{t}")?;
                for v in &outcome.mean_xbar[idx] {
                    write!(w, ",{v}")?;
                }
                for v in &outcome.ode.u[idx] {
                    write!(w, ",{v}")?;
                }
                writeln!(w, ",{}", outcome.per_time_errors[idx])?;
            }
        }
        let json_path = dir.join(format!("report_seed{seed}.json"));
        {
            let mut w = BufWriter::new(File::create(&json_path)?);
            let doc = serde_json::json!({
                "config": serde_json::to_value(&cfg).map_err(|e| ExperimentError::Config(e.to_string()))?,
                "result": serde_json::to_value(&outcome.summary).map_err(|e| ExperimentError::Config(e.to_string()))?,
            });
            serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| ExperimentError::Config(e.to_string()))?;
            writeln!(w)?;
        }
        written.push(csv_path);
        written.push(json_path);
    }
    Ok(written)
}

/// Writes `convergence.csv` (one row per ladder rung) and `convergence.json`
/// (rows plus fitted slopes).
pub fn write_convergence_artifacts(
    table: &ConvergenceTable,
    cfg: &ConvergenceConfig,
    dir: &Path,
) -> Result<Vec<std::path::PathBuf>, ExperimentError> {
    std::fs::create_dir_all(dir)?;
    let cfg = provenance_convergence(cfg);
    let cfg_line = config_line(&cfg)?;
    let csv_path = dir.join("convergence.csv");
    {
        let mut w = BufWriter::new(File::create(&csv_path)?);
        writeln!(w, "# config: {cfg_line}")?;
        writeln!(
            w,
            "x,n,graphs,median_sup_error,median_fluctuation_sup,median_del_star,median_lambda,median_del_exact,median_theta,median_mean_degree,lambda_floor"
        )?;
        for r in &table.rows {
            let lambda = r.median_lambda.map(|v| v.to_string()).unwrap_or_default();
            let exact = r.median_del_exact.map(|v| v.to_string()).unwrap_or_default();
            let floor = r.lambda_floor.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.x,
                r.n,
                r.graphs,
                r.median_sup_error,
                r.median_fluctuation_sup,
                r.median_del_star,
                lambda,
                exact,
                r.median_theta,
                r.median_mean_degree,
                floor
            )?;
        }
    }
    let json_path = dir.join("convergence.json");
    {
        let mut w = BufWriter::new(File::create(&json_path)?);
        let doc = serde_json::json!({
            "config": serde_json::to_value(&cfg).map_err(|e| ExperimentError::Config(e.to_string()))?,
            "table": serde_json::to_value(table).map_err(|e| ExperimentError::Config(e.to_string()))?,
        });
        serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| ExperimentError::Config(e.to_string()))?;
        writeln!(w)?;
    }
    Ok(vec![csv_path, json_path])
}
