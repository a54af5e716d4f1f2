//! Per-DU soft actor-critic policies.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::ActionVec;
use crate::nn::{
    standard_normal, Activation, Adam, AdamConfig, Linear, Mlp, MlpCache, MlpSpec, Module, ParamTensor, PolicySample,
    SquashedGaussian,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActorConfig {
    pub trunk_widths: Vec<usize>,
    pub hidden_activation: Activation,
    pub log_std_min: f64,
    pub log_std_max: f64,
    /// Set from the training configuration.
    #[serde(skip)]
    pub lr: f64,
    /// Entropy temperature; the starting value when auto-tuning. Set from
    /// the training configuration.
    #[serde(skip)]
    pub beta_temp: f64,
    /// Tune the temperature toward a target entropy of `-L`.
    pub auto_temperature: bool,
}

impl Default for ActorConfig {
    fn default() -> Self {
        Self {
            trunk_widths: vec![128, 256, 256],
            hidden_activation: Activation::Tanh,
            log_std_min: crate::nn::LOG_STD_MIN,
            log_std_max: crate::nn::LOG_STD_MAX,
            lr: 1e-4,
            beta_temp: 0.2,
            auto_temperature: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActMode {
    Stochastic,
    Deterministic,
}

/// Policy network `pi_{theta_p,i}`: a tanh trunk feeding a mean head and a
/// log-std head.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorNet {
    pub agent_id: usize,
    pub trunk: Mlp,
    pub mean_head: Linear,
    pub log_std_head: Linear,
    pub policy: SquashedGaussian,
}

/// Forward intermediates of a batch through the actor.
#[derive(Debug, Clone)]
pub struct ActorForward {
    pub sample: PolicySample,
    trunk: MlpCache,
}

impl ActorNet {
    pub fn new<R: Rng + ?Sized>(agent_id: usize, obs_dim: usize, action_dim: usize, cfg: &ActorConfig, rng: &mut R) -> Result<Self> {
        let name = format!("actor{agent_id}");
        let trunk = Mlp::new(&format!("{name}.trunk"), trunk_spec(obs_dim, cfg), rng)?;
        let feat = trunk.spec.output_dim();
        Ok(Self {
            agent_id,
            mean_head: Linear::new(&format!("{name}.mean"), feat, action_dim, rng),
            log_std_head: Linear::new(&format!("{name}.log_std"), feat, action_dim, rng),
            trunk,
            policy: SquashedGaussian { log_std_min: cfg.log_std_min, log_std_max: cfg.log_std_max },
        })
    }

    pub fn zeros(agent_id: usize, obs_dim: usize, action_dim: usize, cfg: &ActorConfig) -> Result<Self> {
        let name = format!("actor{agent_id}");
        let trunk = Mlp::zeros(&format!("{name}.trunk"), trunk_spec(obs_dim, cfg))?;
        let feat = trunk.spec.output_dim();
        Ok(Self {
            agent_id,
            mean_head: Linear::zeros(&format!("{name}.mean"), feat, action_dim),
            log_std_head: Linear::zeros(&format!("{name}.log_std"), feat, action_dim),
            trunk,
            policy: SquashedGaussian { log_std_min: cfg.log_std_min, log_std_max: cfg.log_std_max },
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.trunk.spec.input_dim
    }

    pub fn action_dim(&self) -> usize {
        self.mean_head.output_dim()
    }

    /// Raw head outputs `(mean, log_std)` for a batch of observations.
    pub fn heads(&self, obs: &Array2<f64>) -> Result<(Array2<f64>, Array2<f64>, MlpCache)> {
        let (feat, cache) = self.trunk.forward(obs)?;
        Ok((self.mean_head.forward(&feat)?, self.log_std_head.forward(&feat)?, cache))
    }

    pub fn forward(&self, obs: &Array2<f64>, noise: Array2<f64>) -> Result<ActorForward> {
        let (mean, log_std, trunk) = self.heads(obs)?;
        if noise.dim() != mean.dim() {
            return Err(Error::Shape(format!("noise {:?} vs actions {:?}", noise.dim(), mean.dim())));
        }
        Ok(ActorForward { sample: self.policy.sample(&mean, &log_std, noise), trunk })
    }

    pub fn sample<R: Rng + ?Sized>(&self, obs: &Array2<f64>, rng: &mut R) -> Result<ActorForward> {
        let noise = standard_normal(obs.nrows(), self.action_dim(), rng);
        self.forward(obs, noise)
    }

    /// Parameter gradients (in `params()` order) of a loss whose gradients
    /// with respect to the sampled actions and log-probabilities are given.
    pub fn backward(&self, fwd: &ActorForward, d_action: &Array2<f64>, d_log_prob: &Array1<f64>) -> Result<Vec<Array2<f64>>> {
        let (d_mean, d_log_std) = self.policy.backward(&fwd.sample, d_action, d_log_prob);
        let feat = fwd.trunk.output();
        let [dwm, dbm] = self.mean_head.param_grads(feat, &d_mean);
        let [dws, dbs] = self.log_std_head.param_grads(feat, &d_log_std);
        let d_feat = self.mean_head.backward_input(&d_mean) + self.log_std_head.backward_input(&d_log_std);
        let (_, trunk_grads) = self.trunk.backward(&fwd.trunk, &d_feat, true)?;
        let mut grads = trunk_grads.expect("requested");
        grads.extend([dwm, dbm, dws, dbs]);
        Ok(grads)
    }

    /// Acts on one observation. Deterministic mode returns the squashed mean
    /// together with the log-density at that point.
    pub fn act<R: Rng + ?Sized>(&self, obs: &[f64], mode: ActMode, rng: &mut R) -> Result<(ActionVec, f64)> {
        if obs.len() != self.obs_dim() {
            return Err(Error::Shape(format!("observation has {} entries, actor expects {}", obs.len(), self.obs_dim())));
        }
        if obs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite observation".into()));
        }
        let x = Array2::from_shape_vec((1, obs.len()), obs.to_vec()).map_err(|e| Error::Shape(e.to_string()))?;
        let noise = match mode {
            ActMode::Stochastic => standard_normal(1, self.action_dim(), rng),
            ActMode::Deterministic => Array2::zeros((1, self.action_dim())),
        };
        let out = self.forward(&x, noise)?;
        Ok((ActionVec::new(out.sample.action.row(0).to_vec()), out.sample.log_prob[0]))
    }
}

fn trunk_spec(obs_dim: usize, cfg: &ActorConfig) -> MlpSpec {
    MlpSpec {
        input_dim: obs_dim,
        layer_widths: cfg.trunk_widths.clone(),
        hidden_activation: cfg.hidden_activation,
        output_activation: cfg.hidden_activation,
    }
}

impl Module for ActorNet {
    fn params(&self) -> Vec<&ParamTensor> {
        let mut v = self.trunk.params();
        v.extend(self.mean_head.params());
        v.extend(self.log_std_head.params());
        v
    }

    fn params_mut(&mut self) -> Vec<&mut ParamTensor> {
        let mut v = self.trunk.params_mut();
        v.extend(self.mean_head.params_mut());
        v.extend(self.log_std_head.params_mut());
        v
    }
}

/// A critic as seen by the policy update: `Q_i(s, a)` for every batch row
/// and its gradient with respect to agent `i`'s own action.
pub trait ActionCritic {
    fn q_with_action_grad(
        &self,
        agent: usize,
        obs: &[Array2<f64>],
        actions: &[Array2<f64>],
    ) -> Result<(Array1<f64>, Array2<f64>)>;
}

/// Entropy temperature, fixed or tuned toward a target entropy.
#[derive(Debug, Clone)]
pub enum Temperature {
    Fixed(f64),
    Auto { log_beta: ParamTensor, adam: Adam, target_entropy: f64 },
}

impl Temperature {
    pub fn new(cfg: &ActorConfig, action_dim: usize) -> Self {
        if cfg.auto_temperature {
            let log_beta = ParamTensor::new("log_beta", Array2::from_elem((1, 1), cfg.beta_temp.max(1e-8).ln()));
            let adam = Adam::new(&[&log_beta], AdamConfig { lr: cfg.lr, ..Default::default() });
            Temperature::Auto { log_beta, adam, target_entropy: -(action_dim as f64) }
        } else {
            Temperature::Fixed(cfg.beta_temp)
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Temperature::Fixed(b) => *b,
            Temperature::Auto { log_beta, .. } => log_beta.value[[0, 0]].exp(),
        }
    }

    fn update(&mut self, log_probs: &Array1<f64>) -> Result<()> {
        if let Temperature::Auto { log_beta, adam, target_entropy } = self {
            // loss = -log_beta * mean(log_pi + target)
            let g = -(log_probs.mean().unwrap_or(0.0) + *target_entropy);
            log_beta.grad.fill(g);
            adam.step(&mut [log_beta])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyLoss {
    pub loss: f64,
    pub mean_q: f64,
    pub mean_log_prob: f64,
    pub beta: f64,
}

/// An actor network with its optimizer and temperature.
#[derive(Debug, Clone)]
pub struct SacActor {
    pub net: ActorNet,
    pub adam: Adam,
    pub temperature: Temperature,
}

impl SacActor {
    pub fn new(net: ActorNet, cfg: &ActorConfig) -> Self {
        let adam = Adam::new(&net.params(), AdamConfig { lr: cfg.lr, ..Default::default() });
        let temperature = Temperature::new(cfg, net.action_dim());
        Self { net, adam, temperature }
    }

    pub fn beta(&self) -> f64 {
        self.temperature.value()
    }

    /// One step on `E[beta * log pi(a~|s) - Q_i(s, a~)]` with `a~` drawn by
    /// reparameterization from this policy. `obs` and `actions` hold every
    /// agent's batch; this agent's action slot is replaced by the fresh
    /// sample. Only this actor's parameters change.
    pub fn policy_update<R: Rng + ?Sized>(
        &mut self,
        obs: &[Array2<f64>],
        actions: &[Array2<f64>],
        critic: &dyn ActionCritic,
        rng: &mut R,
    ) -> Result<PolicyLoss> {
        let i = self.net.agent_id;
        let own = obs.get(i).ok_or_else(|| Error::Shape(format!("no observations for agent {i}")))?;
        let rows = own.nrows();
        if rows == 0 {
            return Err(Error::Usage("policy update on an empty batch".into()));
        }
        let beta = self.beta();
        let fwd = self.net.sample(own, rng)?;
        let mut joint = actions.to_vec();
        if joint.len() <= i {
            return Err(Error::Shape(format!("no action slot for agent {i}")));
        }
        joint[i] = fwd.sample.action.clone();
        let (q, dq_da) = critic.q_with_action_grad(i, obs, &joint)?;
        let b = rows as f64;
        let d_action = dq_da.mapv(|g| -g / b);
        let d_log_prob = Array1::from_elem(rows, beta / b);
        let grads = self.net.backward(&fwd, &d_action, &d_log_prob)?;
        self.net.zero_grad();
        self.net.accumulate_grads(&grads)?;
        self.adam.step(&mut self.net.params_mut())?;
        self.temperature.update(&fwd.sample.log_prob)?;

        let mean_q = q.mean().unwrap_or(0.0);
        let mean_log_prob = fwd.sample.log_prob.mean().unwrap_or(0.0);
        Ok(PolicyLoss { loss: beta * mean_log_prob - mean_q, mean_q, mean_log_prob, beta })
    }
}

/// Critic with a closed-form `Q(s, a)` that ignores the observation, for
/// checking the policy update in isolation.
pub struct SyntheticCritic<F, G> {
    pub q: F,
    pub grad: G,
}

impl<F, G> ActionCritic for SyntheticCritic<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    fn q_with_action_grad(
        &self,
        agent: usize,
        _obs: &[Array2<f64>],
        actions: &[Array2<f64>],
    ) -> Result<(Array1<f64>, Array2<f64>)> {
        let a = &actions[agent];
        let mut q = Array1::zeros(a.nrows());
        let mut g = Array2::zeros(a.raw_dim());
        for (r, row) in a.rows().into_iter().enumerate() {
            let row = row.to_vec();
            q[r] = (self.q)(&row);
            for (c, v) in (self.grad)(&row).into_iter().enumerate() {
                g[[r, c]] = v;
            }
        }
        Ok((q, g))
    }
}
