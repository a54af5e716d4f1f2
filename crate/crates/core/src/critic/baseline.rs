//! Joint-input critic without attention: one shared network over every
//! agent's concatenated observation and action, with one output per agent.

use ndarray::{concatenate, s, Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::attention::{check_joint, join};
use crate::error::{Error, Result};
use crate::nn::{Activation, Mlp, MlpCache, MlpSpec, Module, ParamTensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub widths: Vec<usize>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { widths: vec![128, 256, 256] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineCritic {
    pub n_agents: usize,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub net: Mlp,
}

fn spec(n_agents: usize, obs_dim: usize, act_dim: usize, cfg: &BaselineConfig) -> MlpSpec {
    let mut widths = cfg.widths.clone();
    widths.push(n_agents);
    MlpSpec {
        input_dim: n_agents * (obs_dim + act_dim),
        layer_widths: widths,
        hidden_activation: Activation::LeakyRectifier,
        output_activation: Activation::Identity,
    }
}

impl BaselineCritic {
    pub fn new<R: Rng + ?Sized>(
        n_agents: usize,
        obs_dim: usize,
        act_dim: usize,
        cfg: &BaselineConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let net = Mlp::new("critic.joint", spec(n_agents, obs_dim, act_dim, cfg), rng)?;
        Ok(Self { n_agents, obs_dim, act_dim, net })
    }

    pub fn zeros(n_agents: usize, obs_dim: usize, act_dim: usize, cfg: &BaselineConfig) -> Result<Self> {
        let net = Mlp::zeros("critic.joint", spec(n_agents, obs_dim, act_dim, cfg))?;
        Ok(Self { n_agents, obs_dim, act_dim, net })
    }

    fn joint_input(&self, obs: &[Array2<f64>], actions: &[Array2<f64>]) -> Result<Array2<f64>> {
        check_joint(self.n_agents, obs, actions)?;
        let blocks = obs
            .iter()
            .zip(actions)
            .map(|(o, a)| join(o, a, self.obs_dim, self.act_dim))
            .collect::<Result<Vec<_>>>()?;
        let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
        concatenate(Axis(1), &views).map_err(|e| Error::Shape(e.to_string()))
    }

    pub fn forward(&self, obs: &[Array2<f64>], actions: &[Array2<f64>]) -> Result<(Array2<f64>, MlpCache)> {
        self.net.forward(&self.joint_input(obs, actions)?)
    }

    pub fn q_value(&self, agent: usize, obs: &[Array2<f64>], actions: &[Array2<f64>]) -> Result<Array1<f64>> {
        Ok(self.forward(obs, actions)?.0.column(agent).to_owned())
    }

    /// Same contract as the attention critic's reverse pass: per-agent
    /// `[obs, action]` input gradients and optional parameter gradients.
    pub fn backward(
        &self,
        cache: &MlpCache,
        dq: &Array2<f64>,
        want_params: bool,
    ) -> Result<(Vec<Array2<f64>>, Option<Vec<Array2<f64>>>)> {
        let (dx, grads) = self.net.backward(cache, dq, want_params)?;
        let w = self.obs_dim + self.act_dim;
        let d_inputs = (0..self.n_agents).map(|i| dx.slice(s![.., i * w..(i + 1) * w]).to_owned()).collect();
        Ok((d_inputs, grads))
    }
}

impl Module for BaselineCritic {
    fn params(&self) -> Vec<&ParamTensor> {
        self.net.params()
    }

    fn params_mut(&mut self) -> Vec<&mut ParamTensor> {
        self.net.params_mut()
    }
}
