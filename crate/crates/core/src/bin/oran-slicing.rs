use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use oran_slicing::critic::CriticMode;
use oran_slicing::experiment::{run_comparison, run_experiment, Bandwidth, ExperimentConfig};
use oran_slicing::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Attention,
    Baseline,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BwArg {
    Low,
    High,
}

/// Train slice-allocation agents and write result tables.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// TOML experiment file; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// low = 50 resource blocks, high = 200.
    #[arg(long, value_enum)]
    bw: Option<BwArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Final-policy evaluation episodes per agent.
    #[arg(long)]
    episodes: Option<usize>,
    /// Run both modes over `compare_seeds` seeds and summarize.
    #[arg(long)]
    compare: bool,
    /// Validate and print the resolved configuration, then exit.
    #[arg(long)]
    dry_run: bool,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = cli.mode {
        cfg.experiment.mode = match m {
            ModeArg::Attention => CriticMode::Attention,
            ModeArg::Baseline => CriticMode::Baseline,
        };
    }
    if let Some(bw) = cli.bw {
        cfg.experiment.bandwidth = Some(match bw {
            BwArg::Low => Bandwidth::Low,
            BwArg::High => Bandwidth::High,
        });
    }
    if let Some(s) = cli.seed {
        cfg.train.seed = s;
    }
    if let Some(e) = cli.episodes {
        cfg.experiment.final_episodes = e;
    }
    let cfg = cfg.resolved();
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.dry_run {
        return match cfg.to_toml() {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }
    let result = if cli.compare {
        run_comparison(&cfg, &cli.out).map(|s| {
            println!(
                "attention {:.4}  baseline {:.4}  relative improvement {:+.4}  attention >= baseline on {}/{} seeds",
                s.attention_mean,
                s.baseline_mean,
                s.relative_improvement,
                s.attention_wins,
                s.rows.len()
            );
        })
    } else {
        run_experiment(&cfg, &cli.out).map(|r| {
            println!(
                "{} seed {}: {} iterations, final evaluation return {:.4}, artifacts in {}",
                cfg.experiment.mode,
                cfg.train.seed,
                r.report.iterations.len(),
                r.final_mean_return,
                r.dir.display()
            );
        })
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
