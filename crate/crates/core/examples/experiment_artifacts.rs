//! Runs one short experiment end to end and prints the tables it writes:
//! learning curve, throughput CDFs, violation statistics and the manifest.
//!
//! ```text
//! cargo run --release --example experiment_artifacts -- [out_dir] [attention|baseline]
//! ```

use std::path::PathBuf;

use oran_slicing::critic::CriticMode;
use oran_slicing::experiment::{read_mean_returns, run_experiment, ExperimentConfig, RunManifest};

fn main() -> oran_slicing::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("oran-slicing-demo"));
    let mode = match args.next().as_deref() {
        Some("baseline") => CriticMode::Baseline,
        _ => CriticMode::Attention,
    };

    let mut cfg = ExperimentConfig::from_toml(include_str!("../configs/desk.toml"))?;
    cfg.experiment.mode = mode;
    cfg.train.n_iterations = 20;
    cfg.train.updates_per_iteration = 2;
    cfg.train.batch_size = 32;
    let run = run_experiment(&cfg, &out)?;

    let returns = read_mean_returns(&out.join("returns.csv"))?;
    println!("{mode}: {} iterations into {}", returns.len(), out.display());
    for (i, r) in returns.iter().enumerate().step_by(5) {
        println!("  iteration {i:>3}  mean return {r:.3}");
    }
    println!("final-policy evaluation return {:.3}", run.final_mean_return);

    for name in ["embb", "mtc", "urllc"] {
        let text = std::fs::read_to_string(out.join(format!("cdf_{name}.csv")))?;
        let rows = text.lines().count() - 1;
        let median = text
            .lines()
            .skip(1)
            .filter(|l| l.starts_with("final,"))
            .find(|l| l.rsplit(',').next().and_then(|f| f.parse::<f64>().ok()).is_some_and(|f| f >= 0.5))
            .and_then(|l| l.split(',').nth(1).map(str::to_string));
        println!("cdf_{name}.csv: {rows} points, final-policy median {} bps", median.unwrap_or_else(|| "n/a".into()));
    }
    print!("{}", std::fs::read_to_string(out.join("violations.csv"))?);

    let manifest = RunManifest::read(&out.join("manifest.json"))?;
    println!("manifest: status {}, {} files", manifest.status, manifest.files.len());
    for f in &manifest.files {
        println!("  {:<28} {:>8} bytes", f.path, f.bytes);
    }
    Ok(())
}
