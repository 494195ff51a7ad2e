//! CSV and JSON persistence.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ResultRecord;
use crate::Result;

pub const CSV_HEADER: [&str; 10] = [
    "scenario",
    "sweep_name",
    "sweep_value",
    "snr_db",
    "trial",
    "algorithm",
    "sum_rate_bits",
    "outer_iterations",
    "wall_time_ms",
    "converged",
];

/// Mean and standard error of one `(sweep point, SNR, algorithm)` group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub scenario: String,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub snr_db: f64,
    pub algorithm: String,
    pub trials: usize,
    pub mean_sum_rate_bits: f64,
    pub stderr_sum_rate_bits: f64,
    pub mean_outer_iterations: f64,
    pub converged_fraction: f64,
}

/// Groups records in order of first appearance.
pub fn summarize(records: &[ResultRecord]) -> Vec<SummaryEntry> {
    let mut groups: Vec<(&ResultRecord, Vec<&ResultRecord>)> = Vec::new();
    for r in records {
        let same = |g: &ResultRecord| {
            g.scenario == r.scenario
                && g.sweep_name == r.sweep_name
                && g.sweep_value == r.sweep_value
                && g.snr_db == r.snr_db
                && g.algorithm == r.algorithm
        };
        match groups.iter_mut().find(|(key, _)| same(key)) {
            Some((_, members)) => members.push(r),
            None => groups.push((r, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(key, members)| {
            let n = members.len() as f64;
            let mean = members.iter().map(|r| r.sum_rate_bits).sum::<f64>() / n;
            let var = if members.len() > 1 {
                members.iter().map(|r| (r.sum_rate_bits - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            SummaryEntry {
                scenario: key.scenario.clone(),
                sweep_name: key.sweep_name.clone(),
                sweep_value: key.sweep_value,
                snr_db: key.snr_db,
                algorithm: key.algorithm.clone(),
                trials: members.len(),
                mean_sum_rate_bits: mean,
                stderr_sum_rate_bits: (var / n).sqrt(),
                mean_outer_iterations: members.iter().map(|r| r.outer_iterations as f64).sum::<f64>() / n,
                converged_fraction: members.iter().filter(|r| r.converged).count() as f64 / n,
            }
        })
        .collect()
}

/// `results.csv` → `results.summary.json`.
pub fn summary_path(path: &Path) -> PathBuf {
    path.with_extension("summary.json")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

/// Writes the records as CSV and their summary as JSON next to it.
pub fn emit_results(records: &[ResultRecord], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;

    let mut json = BufWriter::new(File::create(summary_path(path))?);
    serde_json::to_writer_pretty(&mut json, &summarize(records))?;
    json.write_all(b"\n")?;
    json.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// `iteration,objective` table of one run.
pub fn emit_convergence_trace(trace: &[f64], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["iteration", "objective"])?;
    for (k, v) in trace.iter().enumerate() {
        w.write_record([k.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
