use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use super::tensor::ParamTensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Adam with bias correction. Moment buffers are aligned with the parameter
/// list passed to [`Adam::new`]; later calls must pass the same list in the
/// same order.
#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    steps: u64,
}

impl Adam {
    pub fn new(params: &[&ParamTensor], config: AdamConfig) -> Self {
        Self {
            config,
            m: params.iter().map(|p| Array2::zeros(p.value.raw_dim())).collect(),
            v: params.iter().map(|p| Array2::zeros(p.value.raw_dim())).collect(),
            steps: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One update from the accumulated gradients. Refuses the whole step,
    /// leaving parameters and moments untouched, if any gradient is
    /// non-finite.
    pub fn step(&mut self, params: &mut [&mut ParamTensor]) -> Result<()> {
        if params.len() != self.m.len() {
            return Err(Error::Shape(format!("optimizer tracks {} tensors, got {}", self.m.len(), params.len())));
        }
        for (p, m) in params.iter().zip(&self.m) {
            if p.grad.dim() != m.dim() {
                return Err(Error::Shape(format!("`{}` changed shape", p.name)));
            }
            if p.grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::PoisonedUpdate(p.name.clone()));
            }
        }
        self.steps += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        let t = self.steps as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        for ((p, m), v) in params.iter_mut().zip(&mut self.m).zip(&mut self.v) {
            Zip::from(&mut p.value).and(&p.grad).and(m).and(v).for_each(|w, &g, m, v| {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *w -= lr * m_hat / (v_hat.sqrt() + eps);
            });
        }
        Ok(())
    }
}

/// `target <- (1 - tau) * target + tau * online`, tensor by tensor.
pub fn polyak_update(target: &mut [&mut ParamTensor], online: &[&ParamTensor], tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidInput(format!("polyak mix {tau} outside (0, 1]")));
    }
    if target.len() != online.len() {
        return Err(Error::Shape(format!("{} target tensors vs {} online", target.len(), online.len())));
    }
    for (t, o) in target.iter().zip(online) {
        if t.value.dim() != o.value.dim() {
            return Err(Error::Shape(format!("`{}` {:?} vs `{}` {:?}", t.name, t.value.dim(), o.name, o.value.dim())));
        }
    }
    for (t, o) in target.iter_mut().zip(online) {
        if tau == 1.0 {
            t.value.assign(&o.value);
        } else {
            Zip::from(&mut t.value).and(&o.value).for_each(|t, &o| *t = (1.0 - tau) * *t + tau * o);
        }
    }
    Ok(())
}
