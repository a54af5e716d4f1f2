//! Centralized critics and their temporal-difference update.

pub mod attention;
pub mod baseline;

use std::sync::Mutex;

use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::actor::{ActionCritic, SacActor};
use crate::error::{Error, Result};
use crate::nn::{polyak_update, Adam, AdamConfig, MlpCache, Module, ParamTensor};

pub use attention::{AttentionCache, AttentionConfig, AttentionCritic};
pub use baseline::{BaselineConfig, BaselineCritic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticMode {
    Attention,
    Baseline,
}

impl std::fmt::Display for CriticMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CriticMode::Attention => "attention",
            CriticMode::Baseline => "baseline",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Critic {
    Attention(AttentionCritic),
    Baseline(BaselineCritic),
}

#[derive(Debug, Clone)]
enum CacheKind {
    Attention(AttentionCache),
    Baseline(MlpCache),
}

/// Q values of every agent (`B x N`) with the reverse-pass intermediates.
#[derive(Debug, Clone)]
pub struct CriticForward {
    pub q: Array2<f64>,
    cache: CacheKind,
}

impl CriticForward {
    pub fn attention(&self) -> Option<&AttentionCache> {
        match &self.cache {
            CacheKind::Attention(c) => Some(c),
            CacheKind::Baseline(_) => None,
        }
    }
}

impl Critic {
    pub fn new<R: Rng + ?Sized>(
        mode: CriticMode,
        n_agents: usize,
        obs_dim: usize,
        act_dim: usize,
        attention: &AttentionConfig,
        baseline: &BaselineConfig,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(match mode {
            CriticMode::Attention => Critic::Attention(AttentionCritic::new(n_agents, obs_dim, act_dim, attention, rng)?),
            CriticMode::Baseline => Critic::Baseline(BaselineCritic::new(n_agents, obs_dim, act_dim, baseline, rng)?),
        })
    }

    pub fn mode(&self) -> CriticMode {
        match self {
            Critic::Attention(_) => CriticMode::Attention,
            Critic::Baseline(_) => CriticMode::Baseline,
        }
    }

    pub fn n_agents(&self) -> usize {
        match self {
            Critic::Attention(c) => c.n_agents,
            Critic::Baseline(c) => c.n_agents,
        }
    }

    pub fn obs_dim(&self) -> usize {
        match self {
            Critic::Attention(c) => c.obs_dim,
            Critic::Baseline(c) => c.obs_dim,
        }
    }

    /// Leading tensors of [`Module::params`] forming the attention group;
    /// the rest are the value group.
    pub fn attention_param_count(&self) -> usize {
        match self {
            Critic::Attention(c) => c.attention_param_count(),
            Critic::Baseline(_) => 0,
        }
    }

    pub fn forward(&self, obs: &[Array2<f64>], actions: &[Array2<f64>]) -> Result<CriticForward> {
        Ok(match self {
            Critic::Attention(c) => {
                let (q, cache) = c.forward(obs, actions)?;
                CriticForward { q, cache: CacheKind::Attention(cache) }
            }
            Critic::Baseline(c) => {
                let (q, cache) = c.forward(obs, actions)?;
                CriticForward { q, cache: CacheKind::Baseline(cache) }
            }
        })
    }

    /// Forward pass that only needs agent `agent`'s Q value.
    pub fn forward_for(&self, obs: &[Array2<f64>], actions: &[Array2<f64>], agent: usize) -> Result<CriticForward> {
        match self {
            Critic::Attention(c) => {
                let (q, cache) = c.forward_for(obs, actions, Some(agent))?;
                Ok(CriticForward { q, cache: CacheKind::Attention(cache) })
            }
            Critic::Baseline(_) => self.forward(obs, actions),
        }
    }

    pub fn backward(
        &self,
        fwd: &CriticForward,
        dq: &Array2<f64>,
        want_params: bool,
    ) -> Result<(Vec<Array2<f64>>, Option<Vec<Array2<f64>>>)> {
        match (self, &fwd.cache) {
            (Critic::Attention(c), CacheKind::Attention(cache)) => c.backward(cache, dq, want_params),
            (Critic::Baseline(c), CacheKind::Baseline(cache)) => c.backward(cache, dq, want_params),
            _ => Err(Error::Usage("forward cache from a different critic kind".into())),
        }
    }

    pub fn q_value(&self, agent: usize, obs: &[Array2<f64>], actions: &[Array2<f64>]) -> Result<Array1<f64>> {
        if agent >= self.n_agents() {
            return Err(Error::Shape(format!("agent {agent} of {}", self.n_agents())));
        }
        Ok(self.forward(obs, actions)?.q.column(agent).to_owned())
    }
}

impl Module for Critic {
    fn params(&self) -> Vec<&ParamTensor> {
        match self {
            Critic::Attention(c) => c.params(),
            Critic::Baseline(c) => c.params(),
        }
    }

    fn params_mut(&mut self) -> Vec<&mut ParamTensor> {
        match self {
            Critic::Attention(c) => c.params_mut(),
            Critic::Baseline(c) => c.params_mut(),
        }
    }
}

/// Running check of the softmax law over every attention vector seen.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AttentionAudit {
    pub vectors: u64,
    pub violations: u64,
    pub max_sum_error: f64,
    pub min_weight: f64,
}

impl AttentionAudit {
    pub fn record(&mut self, cache: &AttentionCache) {
        for a in cache.alphas() {
            if a.ncols() == 0 {
                continue;
            }
            for row in a.rows() {
                let err = (row.sum() - 1.0).abs();
                let min = row.iter().copied().fold(f64::INFINITY, f64::min);
                if self.vectors == 0 || min < self.min_weight {
                    self.min_weight = min;
                }
                self.vectors += 1;
                self.max_sum_error = self.max_sum_error.max(err);
                if min < 0.0 || err > 1e-12 || !err.is_finite() {
                    self.violations += 1;
                }
            }
        }
    }

    pub fn merge(&mut self, other: &AttentionAudit) {
        if other.vectors == 0 {
            return;
        }
        self.min_weight = if self.vectors == 0 { other.min_weight } else { self.min_weight.min(other.min_weight) };
        self.vectors += other.vectors;
        self.violations += other.violations;
        self.max_sum_error = self.max_sum_error.max(other.max_sum_error);
    }
}

/// A batch of time-aligned joint transitions: row `b` of every block comes
/// from the same environment step of every agent.
#[derive(Debug, Clone, PartialEq)]
pub struct JointBatch {
    pub obs: Vec<Array2<f64>>,
    pub actions: Vec<Array2<f64>>,
    /// `B x N`.
    pub rewards: Array2<f64>,
    pub next_obs: Vec<Array2<f64>>,
}

impl JointBatch {
    pub fn rows(&self) -> usize {
        self.rewards.nrows()
    }

    pub fn validate(&self, n_agents: usize) -> Result<()> {
        let rows = self.rows();
        if rows == 0 {
            return Err(Error::Usage("empty batch".into()));
        }
        if self.obs.len() != n_agents
            || self.actions.len() != n_agents
            || self.next_obs.len() != n_agents
            || self.rewards.ncols() != n_agents
        {
            return Err(Error::Shape(format!("batch is not laid out for {n_agents} agents")));
        }
        if self.obs.iter().chain(&self.actions).chain(&self.next_obs).any(|m| m.nrows() != rows) {
            return Err(Error::Shape("misaligned batch rows".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticTargetConfig {
    pub gamma: f64,
    pub beta_temp: f64,
    pub polyak_mix: f64,
}

impl Default for CriticTargetConfig {
    fn default() -> Self {
        Self { gamma: 0.99, beta_temp: 0.2, polyak_mix: 0.005 }
    }
}

impl CriticTargetConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidInput(format!("gamma {} outside [0, 1)", self.gamma)));
        }
        if !(self.beta_temp >= 0.0) {
            return Err(Error::InvalidInput(format!("beta_temp {} is negative", self.beta_temp)));
        }
        if !(self.polyak_mix > 0.0 && self.polyak_mix <= 1.0) {
            return Err(Error::InvalidInput(format!("polyak_mix {} outside (0, 1]", self.polyak_mix)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticLoss {
    pub loss: f64,
    pub mean_q: f64,
    pub mean_target: f64,
}

/// Online critic, its Polyak target copy, and one optimizer per parameter
/// group.
#[derive(Debug)]
pub struct CriticLearner {
    pub online: Critic,
    pub target: Critic,
    adam_attention: Adam,
    adam_value: Adam,
    attention_updates: u64,
    value_updates: u64,
    audit: Mutex<AttentionAudit>,
}

impl CriticLearner {
    pub fn new(online: Critic, lr: f64) -> Self {
        let split = online.attention_param_count();
        let params = online.params();
        let cfg = AdamConfig { lr, ..Default::default() };
        Self {
            adam_attention: Adam::new(&params[..split], cfg),
            adam_value: Adam::new(&params[split..], cfg),
            target: online.clone(),
            online,
            attention_updates: 0,
            value_updates: 0,
            audit: Mutex::new(AttentionAudit::default()),
        }
    }

    pub fn n_agents(&self) -> usize {
        self.online.n_agents()
    }

    /// Optimizer steps taken on the attention and value groups.
    pub fn update_counts(&self) -> (u64, u64) {
        (self.attention_updates, self.value_updates)
    }

    pub fn audit(&self) -> AttentionAudit {
        *self.audit.lock().expect("audit lock")
    }

    fn record(&self, fwd: &CriticForward) {
        if let Some(cache) = fwd.attention() {
            self.audit.lock().expect("audit lock").record(cache);
        }
    }

    /// Soft Bellman targets `y_i = r_i + gamma * Qbar_i(s', a') - beta * log pi_i(a'|s')`
    /// with `a'` freshly sampled from the current policies.
    pub fn targets<R: Rng + ?Sized>(
        &self,
        batch: &JointBatch,
        actors: &[SacActor],
        cfg: &CriticTargetConfig,
        rng: &mut R,
    ) -> Result<Array2<f64>> {
        let n = self.n_agents();
        if actors.len() != n {
            return Err(Error::Shape(format!("{} actors for a critic over {n} agents", actors.len())));
        }
        let mut next_actions = Vec::with_capacity(n);
        let mut next_log_probs = Array2::zeros((batch.rows(), n));
        for (i, actor) in actors.iter().enumerate() {
            let f = actor.net.sample(&batch.next_obs[i], rng)?;
            next_log_probs.column_mut(i).assign(&f.sample.log_prob);
            next_actions.push(f.sample.action);
        }
        let fwd = self.target.forward(&batch.next_obs, &next_actions)?;
        self.record(&fwd);
        Ok(&batch.rewards + &(fwd.q * cfg.gamma) - &(next_log_probs * cfg.beta_temp))
    }

    /// `sum_i mean_b (y_i - Q_i(s, a))^2` under the online critic.
    pub fn td_loss(&self, batch: &JointBatch, y: &Array2<f64>) -> Result<f64> {
        let fwd = self.online.forward(&batch.obs, &batch.actions)?;
        let diff = &fwd.q - y;
        Ok(diff.mapv(|d| d * d).sum() / batch.rows() as f64)
    }

    /// One soft temporal-difference update: a step on the attention
    /// group, then a step on the value group, both from the same gradient,
    /// then a Polyak move of the target copy. Actors are read only.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        batch: &JointBatch,
        actors: &[SacActor],
        cfg: &CriticTargetConfig,
        rng: &mut R,
    ) -> Result<CriticLoss> {
        cfg.validate()?;
        batch.validate(self.n_agents())?;
        let y = self.targets(batch, actors, cfg, rng)?;
        self.update_towards(batch, &y, cfg.polyak_mix)
    }

    /// Gradient step on the fixed regression targets `y`.
    pub fn update_towards(&mut self, batch: &JointBatch, y: &Array2<f64>, polyak_mix: f64) -> Result<CriticLoss> {
        batch.validate(self.n_agents())?;
        let fwd = self.online.forward(&batch.obs, &batch.actions)?;
        self.record(&fwd);
        let b = batch.rows() as f64;
        let diff = &fwd.q - y;
        let loss = diff.mapv(|d| d * d).sum() / b;
        let dq = diff.mapv(|d| 2.0 * d / b);
        let (_, grads) = self.online.backward(&fwd, &dq, true)?;
        let grads = grads.expect("requested");

        self.online.zero_grad();
        self.online.accumulate_grads(&grads)?;
        let split = self.online.attention_param_count();
        {
            let mut params = self.online.params_mut();
            let (attn, value) = params.split_at_mut(split);
            if !attn.is_empty() {
                self.adam_attention.step(attn)?;
                self.attention_updates += 1;
            }
            self.adam_value.step(value)?;
            self.value_updates += 1;
        }
        polyak_update(&mut self.target.params_mut(), &self.online.params(), polyak_mix)?;

        Ok(CriticLoss { loss, mean_q: fwd.q.mean().unwrap_or(0.0), mean_target: y.mean().unwrap_or(0.0) })
    }
}

impl ActionCritic for CriticLearner {
    fn q_with_action_grad(
        &self,
        agent: usize,
        obs: &[Array2<f64>],
        actions: &[Array2<f64>],
    ) -> Result<(Array1<f64>, Array2<f64>)> {
        let fwd = self.online.forward_for(obs, actions, agent)?;
        self.record(&fwd);
        let mut dq = Array2::zeros(fwd.q.raw_dim());
        dq.column_mut(agent).fill(1.0);
        let (d_in, _) = self.online.backward(&fwd, &dq, false)?;
        let obs_dim = self.online.obs_dim();
        Ok((fwd.q.column(agent).to_owned(), d_in[agent].slice(s![.., obs_dim..]).to_owned()))
    }
}

impl ActionCritic for Critic {
    fn q_with_action_grad(
        &self,
        agent: usize,
        obs: &[Array2<f64>],
        actions: &[Array2<f64>],
    ) -> Result<(Array1<f64>, Array2<f64>)> {
        let fwd = self.forward_for(obs, actions, agent)?;
        let mut dq = Array2::zeros(fwd.q.raw_dim());
        dq.column_mut(agent).fill(1.0);
        let (d_in, _) = self.backward(&fwd, &dq, false)?;
        Ok((fwd.q.index_axis(Axis(1), agent).to_owned(), d_in[agent].slice(s![.., self.obs_dim()..]).to_owned()))
    }
}
