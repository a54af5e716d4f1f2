//! Attention critic: per-agent encoders, one shared query/key/value head
//! over the other agents' embeddings, and per-agent Q heads.
//!
//! For agent `i` with embedding `e_i`:
//!
//! ```text
//! score_ij = (W_q e_i) . (W_k e_j) / sqrt(d_attn)      j != i
//! alpha_i  = softmax_j(score_ij)
//! x_i      = sum_j alpha_ij * leaky(V e_j)
//! Q_i      = C_i([e_i, x_i])
//! ```

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{leaky, leaky_grad, softmax_in_place, Activation, Mlp, MlpCache, MlpSpec, Module, ParamTensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttentionConfig {
    pub embed_dim: usize,
    pub attn_dim: usize,
    pub head_widths: Vec<usize>,
}

impl Default for AttentionConfig {
    fn default() -> Self {
        Self { embed_dim: 128, attn_dim: 32, head_widths: vec![256, 256] }
    }
}

impl AttentionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.attn_dim == 0 {
            return Err(Error::InvalidInput("attention dimensions must be positive".into()));
        }
        if self.head_widths.contains(&0) {
            return Err(Error::InvalidInput("zero-width Q-head layer".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionCritic {
    pub n_agents: usize,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub encoders: Vec<Mlp>,
    pub w_k: ParamTensor,
    pub w_q: ParamTensor,
    pub w_v: ParamTensor,
    pub heads: Vec<Mlp>,
}

/// Forward intermediates for one batch.
#[derive(Debug, Clone)]
pub struct AttentionCache {
    enc: Vec<MlpCache>,
    keys: Vec<Array2<f64>>,
    queries: Vec<Array2<f64>>,
    values_pre: Vec<Array2<f64>>,
    values: Vec<Array2<f64>>,
    alphas: Vec<Array2<f64>>,
    heads: Vec<Option<MlpCache>>,
    rows: usize,
}

impl AttentionCache {
    /// Attention weights of every evaluated agent: one row per batch
    /// element, one column per other agent in ascending index order.
    pub fn alphas(&self) -> &[Array2<f64>] {
        &self.alphas
    }

    pub fn embeddings(&self) -> Vec<&Array2<f64>> {
        self.enc.iter().map(|c| c.output()).collect()
    }

    /// True when there is no other agent to attend to, in which case the
    /// attended vector is zero.
    pub fn isolated(&self) -> bool {
        self.enc.len() < 2
    }
}

fn others(i: usize, n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).filter(move |&j| j != i).enumerate()
}

fn fan_in_matrix<R: Rng + ?Sized>(name: &str, rows: usize, cols: usize, rng: &mut R) -> ParamTensor {
    let bound = 1.0 / (cols as f64).sqrt();
    ParamTensor::new(name, Array2::from_shape_fn((rows, cols), |_| rng.random_range(-bound..=bound)))
}

fn encoder_spec(input: usize, cfg: &AttentionConfig) -> MlpSpec {
    MlpSpec {
        input_dim: input,
        layer_widths: vec![cfg.embed_dim],
        hidden_activation: Activation::LeakyRectifier,
        output_activation: Activation::LeakyRectifier,
    }
}

fn head_spec(cfg: &AttentionConfig) -> MlpSpec {
    let mut widths = cfg.head_widths.clone();
    widths.push(1);
    MlpSpec {
        input_dim: 2 * cfg.embed_dim,
        layer_widths: widths,
        hidden_activation: Activation::LeakyRectifier,
        output_activation: Activation::Identity,
    }
}

/// Row-wise dot products of two equally shaped matrices.
fn row_dot(a: &Array2<f64>, b: &Array2<f64>) -> Array1<f64> {
    (a * b).sum_axis(Axis(1))
}

fn scale_rows(m: &Array2<f64>, w: ArrayView1<f64>) -> Array2<f64> {
    m * &w.insert_axis(Axis(1))
}

impl AttentionCritic {
    pub fn new<R: Rng + ?Sized>(
        n_agents: usize,
        obs_dim: usize,
        act_dim: usize,
        cfg: &AttentionConfig,
        rng: &mut R,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut encoders = Vec::with_capacity(n_agents);
        for i in 0..n_agents {
            encoders.push(Mlp::new(&format!("critic.enc{i}"), encoder_spec(obs_dim + act_dim, cfg), rng)?);
        }
        let w_k = fan_in_matrix("critic.w_k", cfg.attn_dim, cfg.embed_dim, rng);
        let w_q = fan_in_matrix("critic.w_q", cfg.attn_dim, cfg.embed_dim, rng);
        let w_v = fan_in_matrix("critic.w_v", cfg.embed_dim, cfg.embed_dim, rng);
        let mut heads = Vec::with_capacity(n_agents);
        for i in 0..n_agents {
            heads.push(Mlp::new(&format!("critic.head{i}"), head_spec(cfg), rng)?);
        }
        Ok(Self { n_agents, obs_dim, act_dim, encoders, w_k, w_q, w_v, heads })
    }

    pub fn zeros(n_agents: usize, obs_dim: usize, act_dim: usize, cfg: &AttentionConfig) -> Result<Self> {
        cfg.validate()?;
        let encoders = (0..n_agents)
            .map(|i| Mlp::zeros(&format!("critic.enc{i}"), encoder_spec(obs_dim + act_dim, cfg)))
            .collect::<Result<_>>()?;
        let heads = (0..n_agents).map(|i| Mlp::zeros(&format!("critic.head{i}"), head_spec(cfg))).collect::<Result<_>>()?;
        Ok(Self {
            n_agents,
            obs_dim,
            act_dim,
            encoders,
            w_k: ParamTensor::zeros("critic.w_k", cfg.attn_dim, cfg.embed_dim),
            w_q: ParamTensor::zeros("critic.w_q", cfg.attn_dim, cfg.embed_dim),
            w_v: ParamTensor::zeros("critic.w_v", cfg.embed_dim, cfg.embed_dim),
            heads,
        })
    }

    pub fn embed_dim(&self) -> usize {
        self.w_v.value.nrows()
    }

    pub fn attn_dim(&self) -> usize {
        self.w_k.value.nrows()
    }

    /// Number of leading tensors in [`Module::params`] that belong to the
    /// attention group (encoders, key, query and value maps).
    pub fn attention_param_count(&self) -> usize {
        2 * self.n_agents + 3
    }

    fn scale(&self) -> f64 {
        1.0 / (self.attn_dim() as f64).sqrt()
    }

    /// `e_i = leaky(g_i [obs, action])` for a batch.
    pub fn embed(&self, agent: usize, obs: &Array2<f64>, action: &Array2<f64>) -> Result<Array2<f64>> {
        let enc = self.encoders.get(agent).ok_or_else(|| Error::Shape(format!("no encoder for agent {agent}")))?;
        Ok(enc.forward(&join(obs, action, self.obs_dim, self.act_dim)?)?.0)
    }

    /// Attention of `agent` over the others, given one embedding per agent.
    pub fn attention_weights(&self, agent: usize, embeddings: &[Array1<f64>]) -> Vec<f64> {
        let q = self.w_q.value.dot(&embeddings[agent]);
        let mut scores: Vec<f64> = others(agent, embeddings.len())
            .map(|(_, j)| q.dot(&self.w_k.value.dot(&embeddings[j])) * self.scale())
            .collect();
        if !scores.is_empty() {
            softmax_in_place(&mut scores);
        }
        scores
    }

    /// `x_i = sum_j alpha_j leaky(V e_j)` with `alpha` ordered as returned
    /// by [`Self::attention_weights`].
    pub fn other_agents_info(&self, agent: usize, embeddings: &[Array1<f64>], alpha: &[f64]) -> Array1<f64> {
        let mut x = Array1::zeros(self.embed_dim());
        for (c, j) in others(agent, embeddings.len()) {
            x.scaled_add(alpha[c], &self.w_v.value.dot(&embeddings[j]).mapv(leaky));
        }
        x
    }

    /// `Q_i(s, a)` for every batch row.
    pub fn q_value(&self, agent: usize, obs: &[Array2<f64>], actions: &[Array2<f64>]) -> Result<Array1<f64>> {
        let (q, _) = self.forward(obs, actions)?;
        Ok(q.column(agent).to_owned())
    }

    /// All agents' Q values, `B x N`.
    pub fn forward(&self, obs: &[Array2<f64>], actions: &[Array2<f64>]) -> Result<(Array2<f64>, AttentionCache)> {
        self.forward_for(obs, actions, None)
    }

    /// Like [`Self::forward`], but when `only` names an agent the other
    /// agents' Q heads are skipped and their columns left at zero.
    pub fn forward_for(
        &self,
        obs: &[Array2<f64>],
        actions: &[Array2<f64>],
        only: Option<usize>,
    ) -> Result<(Array2<f64>, AttentionCache)> {
        let rows = check_joint(self.n_agents, obs, actions)?;
        if let Some(a) = only.filter(|&a| a >= self.n_agents) {
            return Err(Error::Shape(format!("agent {a} of {}", self.n_agents)));
        }
        let n = self.n_agents;
        let mut enc = Vec::with_capacity(n);
        let mut keys = Vec::with_capacity(n);
        let mut queries = Vec::with_capacity(n);
        let mut values_pre = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let (e, c) = self.encoders[i].forward(&join(&obs[i], &actions[i], self.obs_dim, self.act_dim)?)?;
            keys.push(e.dot(&self.w_k.value.t()));
            queries.push(e.dot(&self.w_q.value.t()));
            let vp = e.dot(&self.w_v.value.t());
            values.push(vp.mapv(leaky));
            values_pre.push(vp);
            enc.push(c);
        }
        let scale = self.scale();
        let mut q_all = Array2::zeros((rows, n));
        let mut alphas = Vec::with_capacity(n);
        let mut head_caches = Vec::with_capacity(n);
        for i in 0..n {
            if only.is_some_and(|a| a != i) {
                head_caches.push(None);
                continue;
            }
            let mut alpha = Array2::zeros((rows, n - 1));
            for (c, j) in others(i, n) {
                alpha.column_mut(c).assign(&(row_dot(&queries[i], &keys[j]) * scale));
            }
            for mut row in alpha.rows_mut() {
                softmax_in_place(row.as_slice_mut().expect("contiguous row"));
            }
            let mut x = Array2::zeros((rows, self.embed_dim()));
            for (c, j) in others(i, n) {
                x += &scale_rows(&values[j], alpha.column(c));
            }
            let h = concatenate![Axis(1), *enc[i].output(), x];
            let (qi, hc) = self.heads[i].forward(&h)?;
            q_all.column_mut(i).assign(&qi.column(0));
            alphas.push(alpha);
            head_caches.push(Some(hc));
        }
        Ok((q_all, AttentionCache { enc, keys, queries, values_pre, values, alphas, heads: head_caches, rows }))
    }

    /// Reverse pass for upstream gradient `dq` (`B x N`). Returns the
    /// gradient with respect to each agent's `[obs, action]` input and, when
    /// requested, parameter gradients in [`Module::params`] order.
    pub fn backward(
        &self,
        cache: &AttentionCache,
        dq: &Array2<f64>,
        want_params: bool,
    ) -> Result<(Vec<Array2<f64>>, Option<Vec<Array2<f64>>>)> {
        let n = self.n_agents;
        if cache.heads.len() != n {
            return Err(Error::Usage(format!("cache holds {} agents, critic has {n}", cache.heads.len())));
        }
        let rows = cache.rows;
        if dq.dim() != (rows, n) {
            return Err(Error::Shape(format!("Q gradient {:?} vs ({rows}, {n})", dq.dim())));
        }
        let e_dim = self.embed_dim();
        let scale = self.scale();
        let mut de: Vec<Array2<f64>> = vec![Array2::zeros((rows, e_dim)); n];
        let mut dv: Vec<Array2<f64>> = vec![Array2::zeros((rows, e_dim)); n];
        let mut dk: Vec<Array2<f64>> = vec![Array2::zeros((rows, self.attn_dim())); n];
        let mut dquery: Vec<Array2<f64>> = vec![Array2::zeros((rows, self.attn_dim())); n];
        let mut head_grads = Vec::with_capacity(n);

        let mut evaluated = 0;
        for i in 0..n {
            let Some(head_cache) = &cache.heads[i] else {
                if dq.column(i).iter().any(|&g| g != 0.0) {
                    return Err(Error::Usage(format!("gradient for agent {i}, whose Q head was not evaluated")));
                }
                head_grads.push(want_params.then(|| zero_grads(&self.heads[i])));
                continue;
            };
            let dy = dq.column(i).to_owned().insert_axis(Axis(1));
            let (dh, hg) = self.heads[i].backward(head_cache, &dy, want_params)?;
            head_grads.push(hg);
            de[i] += &dh.slice(s![.., ..e_dim]);
            let dx = dh.slice(s![.., e_dim..]).to_owned();
            let alpha = &cache.alphas[evaluated];
            evaluated += 1;
            if alpha.ncols() == 0 {
                continue;
            }
            let mut dalpha = Array2::zeros(alpha.raw_dim());
            for (c, j) in others(i, n) {
                dv[j] += &scale_rows(&dx, alpha.column(c));
                dalpha.column_mut(c).assign(&row_dot(&dx, &cache.values[j]));
            }
            let inner = (alpha * &dalpha).sum_axis(Axis(1)).insert_axis(Axis(1));
            let dscore = alpha * &(&dalpha - &inner) * scale;
            for (c, j) in others(i, n) {
                dquery[i] += &scale_rows(&cache.keys[j], dscore.column(c));
                dk[j] += &scale_rows(&cache.queries[i], dscore.column(c));
            }
        }

        let mut dw_k = Array2::zeros(self.w_k.value.raw_dim());
        let mut dw_q = Array2::zeros(self.w_q.value.raw_dim());
        let mut dw_v = Array2::zeros(self.w_v.value.raw_dim());
        for j in 0..n {
            let e = cache.enc[j].output();
            let mut dvp = dv[j].clone();
            Zip::from(&mut dvp).and(&cache.values_pre[j]).for_each(|d, &z| *d *= leaky_grad(z));
            if want_params {
                dw_k += &dk[j].t().dot(e);
                dw_q += &dquery[j].t().dot(e);
                dw_v += &dvp.t().dot(e);
            }
            de[j] += &dk[j].dot(&self.w_k.value);
            de[j] += &dquery[j].dot(&self.w_q.value);
            de[j] += &dvp.dot(&self.w_v.value);
        }

        let mut d_inputs = Vec::with_capacity(n);
        let mut grads = want_params.then(Vec::new);
        for i in 0..n {
            let (dz, eg) = self.encoders[i].backward(&cache.enc[i], &de[i], want_params)?;
            d_inputs.push(dz);
            if let (Some(g), Some(eg)) = (grads.as_mut(), eg) {
                g.extend(eg);
            }
        }
        if let Some(g) = grads.as_mut() {
            g.extend([dw_k, dw_q, dw_v]);
            for hg in head_grads {
                g.extend(hg.expect("requested"));
            }
        }
        Ok((d_inputs, grads))
    }
}

fn zero_grads(m: &Mlp) -> Vec<Array2<f64>> {
    m.params().iter().map(|p| Array2::zeros(p.value.raw_dim())).collect()
}

/// Checks that every agent contributes equally many rows and returns that
/// count.
pub(crate) fn check_joint(n_agents: usize, obs: &[Array2<f64>], actions: &[Array2<f64>]) -> Result<usize> {
    if obs.len() != n_agents || actions.len() != n_agents {
        return Err(Error::Shape(format!(
            "critic over {n_agents} agents got {} observation and {} action blocks",
            obs.len(),
            actions.len()
        )));
    }
    let rows = obs.first().map_or(0, |o| o.nrows());
    if obs.iter().chain(actions).any(|m| m.nrows() != rows) {
        return Err(Error::Shape("agent blocks have different batch sizes".into()));
    }
    Ok(rows)
}

pub(crate) fn join(obs: &Array2<f64>, action: &Array2<f64>, obs_dim: usize, act_dim: usize) -> Result<Array2<f64>> {
    if obs.ncols() != obs_dim || action.ncols() != act_dim {
        return Err(Error::Shape(format!(
            "expected {obs_dim} observation and {act_dim} action columns, got {} and {}",
            obs.ncols(),
            action.ncols()
        )));
    }
    Ok(concatenate![Axis(1), *obs, *action])
}

impl Module for AttentionCritic {
    fn params(&self) -> Vec<&ParamTensor> {
        let mut v: Vec<&ParamTensor> = self.encoders.iter().flat_map(|e| e.params()).collect();
        v.extend([&self.w_k, &self.w_q, &self.w_v]);
        v.extend(self.heads.iter().flat_map(|h| h.params()));
        v
    }

    fn params_mut(&mut self) -> Vec<&mut ParamTensor> {
        let mut v: Vec<&mut ParamTensor> = self.encoders.iter_mut().flat_map(|e| e.params_mut()).collect();
        v.extend([&mut self.w_k, &mut self.w_q, &mut self.w_v]);
        v.extend(self.heads.iter_mut().flat_map(|h| h.params_mut()));
        v
    }
}
