//! Trains the attention critic and the joint-input baseline on a small
//! three-DU setup and prints the learning curves side by side.
//!
//! ```text
//! cargo run --release --example train_modes -- [seeds] [updates_per_iteration] [lr]
//! ```

use std::time::Instant;

use oran_slicing::critic::CriticMode;
use oran_slicing::experiment::{smoothed_final, ExperimentConfig};
use oran_slicing::train::{run_training, DuEnvFactory};

fn main() -> oran_slicing::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let updates: Option<usize> = args.next().and_then(|s| s.parse().ok());
    let lr: Option<f64> = args.next().and_then(|s| s.parse().ok());

    let mut cfg = ExperimentConfig::from_toml(include_str!("../configs/desk.toml"))?;
    if let Some(u) = updates {
        cfg.train.updates_per_iteration = u;
    }
    if let Some(lr) = lr {
        cfg.train.lr = lr;
    }
    for seed in 0..seeds {
        for mode in [CriticMode::Attention, CriticMode::Baseline] {
            cfg.train.seed = seed;
            let t = Instant::now();
            let trained = run_training(&cfg.train_config(), &DuEnvFactory { cfg: cfg.env_config(), seed }, mode)?;
            let r = trained.report.mean_returns();
            let first = r[..10.min(r.len())].iter().sum::<f64>() / 10f64.min(r.len() as f64);
            println!(
                "seed {seed} {mode:>9}: first10 {first:7.3}  last10 {:7.3}  iterations {}  {:.1}s",
                smoothed_final(&r, 10).unwrap_or(f64::NAN),
                r.len(),
                t.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
