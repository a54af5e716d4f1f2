use serde::{Deserialize, Serialize};

use crate::actor::ActorConfig;
use crate::critic::{AttentionConfig, BaselineConfig, CriticTargetConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub n_iterations: usize,
    pub n_actors: usize,
    pub n_evaluations: usize,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub gamma: f64,
    pub beta_temp: f64,
    pub polyak_mix: f64,
    pub lr: f64,
    pub convergence_window: usize,
    pub convergence_threshold: f64,
    pub seed: u64,
    /// RL steps per episode.
    pub episode_steps: usize,
    /// Gradient rounds (critic, then every actor) per iteration.
    pub updates_per_iteration: usize,
    /// Run the per-DU rollouts on the thread pool.
    pub parallel: bool,
    pub early_stop: bool,
    /// Network shapes; configured in their own sections of an experiment
    /// file.
    #[serde(skip)]
    pub actor: ActorConfig,
    #[serde(skip)]
    pub attention: AttentionConfig,
    #[serde(skip)]
    pub baseline: BaselineConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_iterations: 100,
            n_actors: 6,
            n_evaluations: 10,
            batch_size: 128,
            buffer_capacity: 1_000_000,
            gamma: 0.99,
            beta_temp: 0.2,
            polyak_mix: 0.005,
            lr: 1e-4,
            convergence_window: 10,
            convergence_threshold: 1e-3,
            seed: 0,
            episode_steps: 50,
            updates_per_iteration: 1,
            parallel: true,
            early_stop: true,
            actor: ActorConfig::default(),
            attention: AttentionConfig::default(),
            baseline: BaselineConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_iterations", self.n_iterations),
            ("n_actors", self.n_actors),
            ("n_evaluations", self.n_evaluations),
            ("batch_size", self.batch_size),
            ("episode_steps", self.episode_steps),
            ("convergence_window", self.convergence_window),
        ] {
            if v == 0 {
                return Err(Error::InvalidInput(format!("{name} must be positive")));
            }
        }
        if self.buffer_capacity < self.batch_size {
            return Err(Error::InvalidInput(format!(
                "buffer_capacity {} is smaller than batch_size {}",
                self.buffer_capacity, self.batch_size
            )));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidInput(format!("lr {} must be positive", self.lr)));
        }
        if !(self.convergence_threshold >= 0.0) {
            return Err(Error::InvalidInput("convergence_threshold must be nonnegative".into()));
        }
        self.targets().validate()?;
        self.attention.validate()
    }

    pub fn targets(&self) -> CriticTargetConfig {
        CriticTargetConfig { gamma: self.gamma, beta_temp: self.beta_temp, polyak_mix: self.polyak_mix }
    }

    /// Actor settings with the run-wide learning rate and temperature.
    pub fn actor_config(&self) -> ActorConfig {
        ActorConfig { lr: self.lr, beta_temp: self.beta_temp, ..self.actor.clone() }
    }
}
