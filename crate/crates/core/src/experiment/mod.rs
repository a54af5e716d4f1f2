//! Experiment configuration, result tables and comparison runs.

pub mod artifacts;
pub mod config;
pub mod metrics;
pub mod run;

pub use artifacts::{read_mean_returns, RunManifest, CSV_SCHEMA_VERSION};
pub use config::{Bandwidth, ExperimentConfig};
pub use metrics::{build_cdf, smoothed_final, violation_std, MetricsRecord};
pub use run::{compare_from_csvs, run_comparison, run_experiment, write_compare_csv, CompareSummary, RunOutcome};
