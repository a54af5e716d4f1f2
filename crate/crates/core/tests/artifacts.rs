use std::path::{Path, PathBuf};

use oran_slicing::critic::CriticMode;
use oran_slicing::experiment::{
    compare_from_csvs, read_mean_returns, run_experiment, smoothed_final, ExperimentConfig, RunManifest,
};
use oran_slicing::nn::Checkpoint;

fn tiny() -> ExperimentConfig {
    ExperimentConfig::from_toml(include_str!("fixtures/tiny.toml")).unwrap()
}

#[test]
fn manifest_inventories_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_experiment(&tiny(), dir.path()).unwrap();
    let m = RunManifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.status, "ok");
    assert_eq!(m.iterations_run, 6);
    assert_eq!(m.final_mean_return, Some(run.final_mean_return));
    assert_eq!(m.config.resolved(), tiny().resolved());
    let listed: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
    for f in [
        "returns.csv",
        "cdf_embb.csv",
        "cdf_mtc.csv",
        "cdf_urllc.csv",
        "violations.csv",
        "violation_series.csv",
        "checkpoints/actor_0.ckpt",
        "checkpoints/actor_1.ckpt",
        "checkpoints/critic.ckpt",
    ] {
        assert!(listed.contains(&f), "{f} not listed");
    }
    for f in &m.files {
        assert_eq!(std::fs::metadata(dir.path().join(&f.path)).unwrap().len(), f.bytes, "{}", f.path);
        if f.path.ends_with(".csv") {
            let header = std::fs::read_to_string(dir.path().join(&f.path)).unwrap();
            let header: Vec<&str> = header.lines().next().unwrap().split(',').collect();
            assert_eq!(m.csv_schemas[&f.path], header, "{}", f.path);
        }
    }
    let ck = Checkpoint::load(dir.path().join("checkpoints/critic.ckpt")).unwrap();
    assert!(ck.entries.iter().any(|e| e.name.starts_with("online/")));
    assert!(ck.entries.iter().any(|e| e.name.starts_with("target/")));
}

#[test]
fn failed_runs_still_leave_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny();
    cfg.train.lr = f64::NAN;
    assert!(run_experiment(&cfg, dir.path()).is_err());
    assert!(!dir.path().join("manifest.json").exists());

    std::fs::write(dir.path().join("checkpoints"), "in the way").unwrap();
    assert!(run_experiment(&tiny(), dir.path()).is_err());
    let m = RunManifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.status, "failed");
    assert!(m.error.is_some());
    assert_eq!(m.final_mean_return, None);
    assert!(m.files.iter().any(|f| f.path == "returns.csv"));
}

fn write_returns(path: &Path, mode: &str, values: &[f64]) {
    let mut text = String::from("iteration,mode,agent_0,mean_return\n");
    for (i, v) in values.iter().enumerate() {
        text.push_str(&format!("{i},{mode},{v},{v}\n"));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn comparison_is_a_function_of_the_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for (seed, att, base) in [(0u64, [1.0, 2.0, 4.0, 6.0], [1.0, 1.0, 2.0, 2.0]), (1, [3.0, 3.0, 3.0, 1.0], [0.0, 4.0, 4.0, 4.0])] {
        let a: PathBuf = dir.path().join(format!("a{seed}.csv"));
        let b: PathBuf = dir.path().join(format!("b{seed}.csv"));
        write_returns(&a, "attention", &att);
        write_returns(&b, "baseline", &base);
        runs.push((seed, a, b));
    }
    let s = compare_from_csvs(&runs, 2).unwrap();
    assert_eq!(s.rows[0].attention, 5.0);
    assert_eq!(s.rows[0].baseline, 2.0);
    assert_eq!(s.rows[1].attention, 2.0);
    assert_eq!(s.rows[1].baseline, 4.0);
    assert_eq!(s.attention_mean, 3.5);
    assert_eq!(s.baseline_mean, 3.0);
    assert!((s.relative_improvement - 0.5 / 3.0).abs() < 1e-15);
    assert_eq!(s.attention_wins, 1);
    assert_eq!(compare_from_csvs(&runs, 2).unwrap(), s);
    assert_eq!(smoothed_final(&read_mean_returns(&runs[0].1).unwrap(), 2), Some(5.0));
}

#[test]
fn training_and_evaluation_throughput_feed_the_cdfs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny();
    cfg.experiment.mode = CriticMode::Baseline;
    run_experiment(&cfg, dir.path()).unwrap();
    for name in ["embb", "mtc", "urllc"] {
        let text = std::fs::read_to_string(dir.path().join(format!("cdf_{name}.csv"))).unwrap();
        let mut last = (String::new(), f64::NEG_INFINITY, 0.0);
        let mut phases = std::collections::BTreeSet::new();
        for line in text.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let (phase, v, c) = (f[0].to_string(), f[1].parse::<f64>().unwrap(), f[2].parse::<f64>().unwrap());
            if phase == last.0 {
                assert!(v > last.1 && c > last.2, "{name}: not increasing");
            }
            assert!(c > 0.0 && c <= 1.0);
            phases.insert(phase.clone());
            last = (phase, v, c);
        }
        assert!(phases.contains("training") && phases.contains("final"), "{name}: {phases:?}");
    }
}

#[test]
fn shipped_configs_parse_and_validate() {
    let default = ExperimentConfig::from_toml(include_str!("../configs/default.toml")).unwrap();
    assert_eq!(default.resolved(), ExperimentConfig::default().resolved());
    let desk = ExperimentConfig::from_toml(include_str!("../configs/desk.toml")).unwrap().resolved();
    desk.validate().unwrap();
    assert_eq!((desk.train.n_actors, desk.env.ues_per_du, desk.radio.total_rbs), (3, 10, 20));
    assert_eq!((desk.train.n_iterations, desk.train.n_evaluations), (100, 5));
}
