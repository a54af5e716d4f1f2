use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use ndarray::Array2;

use crate::error::{Error, Result};

/// A named trainable matrix with its accumulated gradient.
///
/// Vectors (biases) are stored as `1 x n` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTensor {
    pub name: String,
    pub value: Array2<f64>,
    pub grad: Array2<f64>,
}

impl ParamTensor {
    pub fn new(name: impl Into<String>, value: Array2<f64>) -> Self {
        let grad = Array2::zeros(value.raw_dim());
        Self { name: name.into(), value, grad }
    }

    pub fn zeros(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        Self::new(name, Array2::zeros((rows, cols)))
    }

    pub fn shape(&self) -> Vec<usize> {
        self.value.shape().to_vec()
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }

    pub fn accumulate(&mut self, g: &Array2<f64>) -> Result<()> {
        if g.dim() != self.grad.dim() {
            return Err(Error::Shape(format!(
                "gradient {:?} for `{}` of shape {:?}",
                g.dim(),
                self.name,
                self.grad.dim()
            )));
        }
        self.grad += g;
        Ok(())
    }
}

/// A collection of parameters with a fixed, canonical order.
///
/// Gradient vectors returned by the `backward` methods of this crate follow
/// the same order as [`Module::params`].
pub trait Module {
    fn params(&self) -> Vec<&ParamTensor>;
    fn params_mut(&mut self) -> Vec<&mut ParamTensor>;

    fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    fn num_params(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    fn accumulate_grads(&mut self, grads: &[Array2<f64>]) -> Result<()> {
        let mut params = self.params_mut();
        if params.len() != grads.len() {
            return Err(Error::Shape(format!("{} gradients for {} parameters", grads.len(), params.len())));
        }
        for (p, g) in params.iter_mut().zip(grads) {
            p.accumulate(g)?;
        }
        Ok(())
    }

    /// Hash of every parameter value's bit pattern, for change detection.
    fn fingerprint(&self) -> u64 {
        fingerprint(&self.params())
    }
}

pub fn fingerprint(params: &[&ParamTensor]) -> u64 {
    let mut h = DefaultHasher::new();
    for p in params {
        p.name.hash(&mut h);
        for v in p.value.iter() {
            v.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

/// Squared L2 norm of the difference between two parameter lists.
pub fn param_distance_sq(a: &[&ParamTensor], b: &[&ParamTensor]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.value.iter().zip(y.value.iter()).map(|(u, v)| (u - v).powi(2)).sum::<f64>())
        .sum()
}
