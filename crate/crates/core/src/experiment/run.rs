use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::artifacts::{
    inventory, read_mean_returns, returns_header, unix_now, write_cdf_csv, write_returns_csv, write_violation_series_csv,
    write_violations_csv, RunManifest, CDF_HEADER, CSV_SCHEMA_VERSION, VIOLATIONS_HEADER,
};
use super::config::ExperimentConfig;
use super::metrics::{smoothed_final, MetricsRecord};
use crate::critic::CriticMode;
use crate::error::{Error, Result};
use crate::train::{evaluate_policy, run_training, DuEnvFactory, TrainReport};

/// Factory variant used for final-policy evaluation environments.
pub const FINAL_EVAL_VARIANT: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: TrainReport,
    pub final_mean_return: f64,
    pub files: Vec<PathBuf>,
}

fn slice_names(cfg: &ExperimentConfig) -> Vec<String> {
    cfg.slices.build(1).into_iter().map(|s| s.name).collect()
}

/// Trains one mode with one seed and writes every artifact into `dir`.
/// On failure a manifest with `status = "failed"` is still written.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome> {
    let cfg = cfg.resolved();
    cfg.validate()?;
    std::fs::create_dir_all(dir)?;
    let started = unix_now();
    let mut files = Vec::new();
    let result = run_inner(&cfg, dir, &mut files);
    let (status, error, report, final_mean) = match &result {
        Ok((report, f)) => ("ok", None, Some(report), Some(*f)),
        Err(e) => ("failed", Some(e.to_string()), None, None),
    };
    let manifest = RunManifest {
        csv_schema_version: CSV_SCHEMA_VERSION,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        status: status.into(),
        error,
        mode: cfg.experiment.mode,
        seed: cfg.train.seed,
        started_unix_s: started,
        finished_unix_s: unix_now(),
        iterations_run: report.map_or(0, |r| r.iterations.len()),
        converged_at: report.and_then(|r| r.converged_at),
        final_mean_return: final_mean,
        config: cfg.clone(),
        files: inventory(dir, &files)?,
        csv_schemas: schemas(&cfg),
    };
    manifest.write(&dir.join("manifest.json"))?;
    let (report, final_mean_return) = result?;
    Ok(RunOutcome { dir: dir.to_path_buf(), report, final_mean_return, files })
}

fn schemas(cfg: &ExperimentConfig) -> BTreeMap<String, Vec<String>> {
    let mut m = BTreeMap::new();
    let own = |h: &[&str]| h.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    m.insert("returns.csv".into(), returns_header(cfg.train.n_actors));
    for name in slice_names(cfg) {
        m.insert(format!("cdf_{name}.csv"), own(&CDF_HEADER));
    }
    m.insert("violations.csv".into(), own(&VIOLATIONS_HEADER));
    let mut series = vec!["iteration".to_string()];
    series.extend(slice_names(cfg));
    m.insert("violation_series.csv".into(), series);
    m
}

fn run_inner(cfg: &ExperimentConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<(TrainReport, f64)> {
    let mode = cfg.experiment.mode;
    let tcfg = cfg.train_config();
    let factory = DuEnvFactory { cfg: cfg.env_config(), seed: tcfg.seed };
    let trained = run_training(&tcfg, &factory, mode)?;
    let records: Vec<MetricsRecord> =
        trained.report.iterations.iter().map(|m| MetricsRecord::from_iteration(mode, m)).collect();

    let p = dir.join("returns.csv");
    write_returns_csv(&p, &records)?;
    files.push(p);

    let eval = evaluate_policy(
        &trained.actor_nets(),
        &factory,
        FINAL_EVAL_VARIANT,
        cfg.experiment.final_episodes,
        tcfg.episode_steps,
        tcfg.gamma,
    )?;

    let names = slice_names(cfg);
    for (s, name) in names.iter().enumerate() {
        let training: Vec<f64> = records
            .iter()
            .flat_map(|r| r.per_user_throughput_sample.iter().filter(|(l, _)| *l == s).map(|&(_, v)| v))
            .collect();
        let fin: Vec<f64> = eval.throughput.iter().filter(|(l, _)| *l == s).map(|&(_, v)| v).collect();
        let p = dir.join(format!("cdf_{name}.csv"));
        write_cdf_csv(&p, &[("training", &training), ("final", &fin)])?;
        files.push(p);
    }

    let series: Vec<Vec<f64>> = records.iter().map(|r| r.per_slice_violation.clone()).collect();
    let p = dir.join("violations.csv");
    write_violations_csv(&p, &names, &series, &eval.per_slice_violation)?;
    files.push(p);
    let p = dir.join("violation_series.csv");
    write_violation_series_csv(&p, &names, &series)?;
    files.push(p);

    let ck = dir.join("checkpoints");
    std::fs::create_dir_all(&ck)?;
    files.extend(trained.save_checkpoints(&ck)?);

    Ok((trained.report, eval.mean_return()))
}

/// Seed-paired comparison of final smoothed returns.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareSummary {
    pub rows: Vec<CompareRow>,
    pub attention_mean: f64,
    pub baseline_mean: f64,
    /// `(attention - baseline) / |baseline|`.
    pub relative_improvement: f64,
    /// Seeds where attention's final return is at least the baseline's.
    pub attention_wins: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub seed: u64,
    pub attention: f64,
    pub baseline: f64,
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b) / b.abs().max(1e-12)
}

/// Builds the comparison from `(seed, attention returns.csv, baseline
/// returns.csv)` triples; a pure function of those files.
pub fn compare_from_csvs(runs: &[(u64, PathBuf, PathBuf)], window: usize) -> Result<CompareSummary> {
    if runs.is_empty() {
        return Err(Error::Empty("no runs to compare".into()));
    }
    let mut rows = Vec::with_capacity(runs.len());
    for (seed, att, base) in runs {
        let final_of = |p: &Path| {
            smoothed_final(&read_mean_returns(p)?, window)
                .ok_or_else(|| Error::Empty(format!("{} has no iterations", p.display())))
        };
        rows.push(CompareRow { seed: *seed, attention: final_of(att)?, baseline: final_of(base)? });
    }
    let n = rows.len() as f64;
    let attention_mean = rows.iter().map(|r| r.attention).sum::<f64>() / n;
    let baseline_mean = rows.iter().map(|r| r.baseline).sum::<f64>() / n;
    Ok(CompareSummary {
        attention_wins: rows.iter().filter(|r| r.attention >= r.baseline).count(),
        relative_improvement: relative(attention_mean, baseline_mean),
        rows,
        attention_mean,
        baseline_mean,
    })
}

pub fn write_compare_csv(path: &Path, s: &CompareSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let rec = |w: &mut csv::Writer<std::fs::File>, r: [String; 4]| w.write_record(r).map_err(|e| Error::InvalidInput(e.to_string()));
    rec(&mut w, ["seed", "attention_final_return", "baseline_final_return", "relative_improvement"].map(String::from))?;
    for r in &s.rows {
        rec(&mut w, [r.seed.to_string(), r.attention.to_string(), r.baseline.to_string(), relative(r.attention, r.baseline).to_string()])?;
    }
    rec(&mut w, ["mean".into(), s.attention_mean.to_string(), s.baseline_mean.to_string(), s.relative_improvement.to_string()])?;
    w.flush()?;
    Ok(())
}

/// Both modes over `compare_seeds` consecutive seeds, each run in
/// `<out>/<mode>/seed_<s>`, summarized in `<out>/compare_summary.csv`.
pub fn run_comparison(cfg: &ExperimentConfig, out: &Path) -> Result<CompareSummary> {
    let cfg = cfg.resolved();
    cfg.validate()?;
    let mut runs = Vec::new();
    for k in 0..cfg.experiment.compare_seeds as u64 {
        let seed = cfg.train.seed + k;
        let mut paths = Vec::new();
        for mode in [CriticMode::Attention, CriticMode::Baseline] {
            let mut c = cfg.clone();
            c.experiment.mode = mode;
            c.train.seed = seed;
            let dir = out.join(mode.to_string()).join(format!("seed_{seed}"));
            run_experiment(&c, &dir)?;
            paths.push(dir.join("returns.csv"));
        }
        runs.push((seed, paths[0].clone(), paths[1].clone()));
    }
    let summary = compare_from_csvs(&runs, cfg.experiment.smoothing_window)?;
    write_compare_csv(&out.join("compare_summary.csv"), &summary)?;
    Ok(summary)
}
