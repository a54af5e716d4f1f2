use serde::{Deserialize, Serialize};

use crate::critic::CriticMode;
use crate::error::{Error, Result};
use crate::train::IterationMetrics;

/// One training iteration as written to the artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub iteration: usize,
    pub mode: CriticMode,
    pub per_agent_return: Vec<f64>,
    pub mean_return: f64,
    pub per_slice_violation: Vec<f64>,
    pub per_user_throughput_sample: Vec<(usize, f64)>,
}

impl MetricsRecord {
    pub fn from_iteration(mode: CriticMode, m: &IterationMetrics) -> Self {
        Self {
            iteration: m.iteration,
            mode,
            per_agent_return: m.per_agent_return.clone(),
            mean_return: m.mean_return,
            per_slice_violation: m.per_slice_violation.clone(),
            per_user_throughput_sample: m.throughput.clone(),
        }
    }
}

/// Empirical CDF: distinct values ascending, each with the fraction of
/// samples at or below it.
pub fn build_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::Empty("no samples for a CDF".into()));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("NaN sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut table: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match table.last_mut() {
            Some(last) if last.0 == v => last.1 = frac,
            _ => table.push((v, frac)),
        }
    }
    Ok(table)
}

/// Population standard deviation of each slice's violation over the
/// iterations of `series` (`[iteration][slice]`).
pub fn violation_std(series: &[Vec<f64>]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::InvalidInput(format!("violation series of length {} (need at least 2)", series.len())));
    }
    let l = series[0].len();
    if series.iter().any(|row| row.len() != l) {
        return Err(Error::Shape("ragged violation series".into()));
    }
    // Welford's running update
    let mut mean = vec![0.0; l];
    let mut m2 = vec![0.0; l];
    for (k, row) in series.iter().enumerate() {
        for s in 0..l {
            let d = row[s] - mean[s];
            mean[s] += d / (k + 1) as f64;
            m2[s] += d * (row[s] - mean[s]);
        }
    }
    Ok(m2.iter().map(|v| (v / series.len() as f64).max(0.0).sqrt()).collect())
}

/// Mean of the last `window` entries (all of them when fewer).
pub fn smoothed_final(values: &[f64], window: usize) -> Option<f64> {
    if values.is_empty() || window == 0 {
        return None;
    }
    let tail = &values[values.len().saturating_sub(window)..];
    Some(tail.iter().sum::<f64>() / tail.len() as f64)
}
