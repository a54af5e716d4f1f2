use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::actor::ActorConfig;
use crate::critic::{AttentionConfig, BaselineConfig, CriticMode};
use crate::error::{Error, Result};
use crate::radio::{EnvConfig, RadioConfig, SliceDefaults};
use crate::train::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// 10 MHz, 50 resource blocks.
    Low,
    /// 20 MHz, 200 resource blocks.
    High,
}

impl Bandwidth {
    pub fn total_rbs(self) -> usize {
        match self {
            Bandwidth::Low => 50,
            Bandwidth::High => 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    pub ues_per_du: usize,
}

impl Default for EnvSection {
    fn default() -> Self {
        Self { ues_per_du: EnvConfig::default().ues_per_du }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub mode: CriticMode,
    /// When set, overrides `radio.total_rbs`.
    pub bandwidth: Option<Bandwidth>,
    /// Deterministic episodes per agent for the final-policy evaluation.
    pub final_episodes: usize,
    /// Seeds per mode in comparison runs, counting up from `train.seed`.
    pub compare_seeds: usize,
    /// Trailing iterations averaged into the final smoothed return.
    pub smoothing_window: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self { mode: CriticMode::Attention, bandwidth: None, final_episodes: 10, compare_seeds: 5, smoothing_window: 10 }
    }
}

/// Everything a run needs, one section per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub radio: RadioConfig,
    pub slices: SliceDefaults,
    pub env: EnvSection,
    pub train: TrainConfig,
    pub actor: ActorConfig,
    pub attention: AttentionConfig,
    pub baseline: BaselineConfig,
    pub experiment: ExperimentSection,
}

impl ExperimentConfig {
    /// Parses TOML. Syntax and type errors carry line and column.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies the bandwidth override and copies the per-network sections
    /// into the training configuration.
    pub fn resolved(&self) -> Self {
        let mut cfg = self.clone();
        if let Some(bw) = cfg.experiment.bandwidth {
            cfg.radio.total_rbs = bw.total_rbs();
        }
        cfg.train.actor = cfg.actor.clone();
        cfg.train.attention = cfg.attention.clone();
        cfg.train.baseline = cfg.baseline.clone();
        cfg
    }

    pub fn env_config(&self) -> EnvConfig {
        let r = self.resolved();
        EnvConfig { radio: r.radio, slices: r.slices, ues_per_du: r.env.ues_per_du }
    }

    pub fn train_config(&self) -> TrainConfig {
        self.resolved().train
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |section: &str, e: Error| Error::Config(format!("[{section}] {e}"));
        let env = self.env_config();
        env.radio.validate().map_err(|e| wrap("radio", e))?;
        env.validate().map_err(|e| wrap("env", e))?;
        self.train_config().validate().map_err(|e| wrap("train", e))?;
        if self.experiment.smoothing_window == 0 {
            return Err(Error::Config("[experiment] smoothing_window must be positive".into()));
        }
        if self.experiment.compare_seeds == 0 {
            return Err(Error::Config("[experiment] compare_seeds must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_shipped_defaults() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        cfg.validate().unwrap();
        assert_eq!(cfg.train.n_actors, 6);
        assert_eq!(cfg.train.n_evaluations, 10);
        assert_eq!(cfg.train.batch_size, 128);
        assert_eq!(cfg.env.ues_per_du, 50);
        assert_eq!(cfg.radio.rb_bandwidth_hz, 200e3);
    }

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn syntax_errors_report_the_line() {
        let err = ExperimentConfig::from_toml("[train]\nn_actors = 3\nseed = \"x\"\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = ExperimentConfig::from_toml("[train]\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn bandwidth_sets_rb_count() {
        let mut cfg = ExperimentConfig::default();
        cfg.experiment.bandwidth = Some(Bandwidth::High);
        assert_eq!(cfg.env_config().radio.total_rbs, 200);
        cfg.experiment.bandwidth = Some(Bandwidth::Low);
        assert_eq!(cfg.env_config().radio.total_rbs, 50);
    }

    #[test]
    fn semantic_errors_name_the_section() {
        let cfg = ExperimentConfig::from_toml("[train]\nbatch_size = 0\n").unwrap();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("[train]"), "{err}");
    }
}
