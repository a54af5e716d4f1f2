//! Plot-ready CSV tables and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::{build_cdf, violation_std, MetricsRecord};
use crate::critic::CriticMode;
use crate::error::{Error, Result};

pub const CSV_SCHEMA_VERSION: u32 = 1;

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidInput(format!("{other:?}")),
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn returns_header(n_agents: usize) -> Vec<String> {
    let mut h = vec!["iteration".to_string(), "mode".to_string()];
    h.extend((0..n_agents).map(|i| format!("agent_{i}")));
    h.push("mean_return".into());
    h
}

/// `iteration, mode, agent_0 .. agent_{N-1}, mean_return`.
pub fn write_returns_csv(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    let n = records.first().map_or(0, |r| r.per_agent_return.len());
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(returns_header(n)).map_err(csv_err)?;
    for r in records {
        let mut row = vec![r.iteration.to_string(), r.mode.to_string()];
        row.extend(r.per_agent_return.iter().map(|&v| num(v)));
        row.push(num(r.mean_return));
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// The `mean_return` column of a returns table, in file order.
pub fn read_mean_returns(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let col = headers
        .iter()
        .position(|h| h == "mean_return")
        .ok_or_else(|| Error::InvalidInput(format!("{} has no mean_return column", path.display())))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let v = rec.get(col).unwrap_or("");
        out.push(v.parse::<f64>().map_err(|e| Error::InvalidInput(format!("{}: `{v}`: {e}", path.display())))?);
    }
    Ok(out)
}

pub const CDF_HEADER: [&str; 3] = ["phase", "value_bps", "cumulative_fraction"];

/// Writes one CDF table per phase (`training`, `final`) into a single file.
pub fn write_cdf_csv(path: &Path, phases: &[(&str, &[f64])]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(CDF_HEADER).map_err(csv_err)?;
    for (phase, samples) in phases {
        if samples.is_empty() {
            continue;
        }
        for (v, f) in build_cdf(samples)? {
            w.write_record([phase.to_string(), num(v), num(f)]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub const VIOLATIONS_HEADER: [&str; 5] = ["slice", "violation_std", "violation_mean", "final_violation", "iterations"];

/// Per-slice standard deviation (population) and mean of the per-iteration
/// violation, with the final-policy violation alongside.
pub fn write_violations_csv(
    path: &Path,
    slice_names: &[String],
    series: &[Vec<f64>],
    final_violation: &[f64],
) -> Result<()> {
    let std = if series.len() >= 2 { violation_std(series)? } else { vec![f64::NAN; slice_names.len()] };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(VIOLATIONS_HEADER).map_err(csv_err)?;
    for (s, name) in slice_names.iter().enumerate() {
        let mean = series.iter().map(|r| r[s]).sum::<f64>() / series.len().max(1) as f64;
        let fin = final_violation.get(s).copied().unwrap_or(f64::NAN);
        w.write_record([name.clone(), num(std[s]), num(mean), num(fin), series.len().to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `iteration, <slice>...` violation per iteration.
pub fn write_violation_series_csv(path: &Path, slice_names: &[String], series: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["iteration".to_string()];
    header.extend(slice_names.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (i, row) in series.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|&v| num(v)));
        w.write_record(rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub csv_schema_version: u32,
    pub crate_version: String,
    pub status: String,
    pub error: Option<String>,
    pub mode: CriticMode,
    pub seed: u64,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub iterations_run: usize,
    pub converged_at: Option<usize>,
    pub final_mean_return: Option<f64>,
    pub config: ExperimentConfig,
    pub files: Vec<FileEntry>,
    pub csv_schemas: BTreeMap<String, Vec<String>>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// Paths relative to `root` with their sizes, sorted.
pub fn inventory(root: &Path, files: &[PathBuf]) -> Result<Vec<FileEntry>> {
    let mut out = Vec::with_capacity(files.len());
    for f in files {
        let rel = f.strip_prefix(root).unwrap_or(f);
        out.push(FileEntry { path: rel.to_string_lossy().replace('\\', "/"), bytes: std::fs::metadata(f)?.len() });
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}
