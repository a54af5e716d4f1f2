use ndarray::{Array2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{Module, ParamTensor};
use crate::error::{Error, Result};

pub const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Tanh,
    LeakyRectifier,
    Softmax,
}

impl Activation {
    pub fn apply(self, z: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Identity => z.clone(),
            Activation::Tanh => z.mapv(f64::tanh),
            Activation::LeakyRectifier => z.mapv(leaky),
            Activation::Softmax => {
                let mut y = z.clone();
                for mut row in y.rows_mut() {
                    softmax_in_place(row.as_slice_mut().expect("contiguous row"));
                }
                y
            }
        }
    }

    /// Gradient with respect to the pre-activation `z`, given `y = f(z)` and
    /// the upstream gradient `dy`.
    pub fn backward(self, z: &Array2<f64>, y: &Array2<f64>, dy: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Identity => dy.clone(),
            Activation::Tanh => {
                let mut dz = dy.clone();
                Zip::from(&mut dz).and(y).for_each(|d, &t| *d *= 1.0 - t * t);
                dz
            }
            Activation::LeakyRectifier => {
                let mut dz = dy.clone();
                Zip::from(&mut dz).and(z).for_each(|d, &x| *d *= leaky_grad(x));
                dz
            }
            Activation::Softmax => {
                let mut dz = dy.clone();
                for (mut d, s) in dz.rows_mut().into_iter().zip(y.rows()) {
                    let dot: f64 = d.iter().zip(s.iter()).map(|(g, p)| g * p).sum();
                    d.iter_mut().zip(s.iter()).for_each(|(g, p)| *g = p * (*g - dot));
                }
                dz
            }
        }
    }
}

pub fn leaky(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAKY_SLOPE * x
    }
}

/// Derivative of the leaky rectifier; at exactly zero the negative-side
/// slope is used.
pub fn leaky_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        LEAKY_SLOPE
    }
}

pub fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// Fully-connected layer `y = x W^T + b` over a batch of row vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: ParamTensor,
    pub bias: ParamTensor,
}

impl Linear {
    /// Uniform fan-in initialization, `U(-1/sqrt(in), 1/sqrt(in))`.
    pub fn new<R: Rng + ?Sized>(name: &str, input: usize, output: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (input as f64).sqrt();
        let w = Array2::from_shape_fn((output, input), |_| rng.random_range(-bound..=bound));
        let b = Array2::from_shape_fn((1, output), |_| rng.random_range(-bound..=bound));
        Self { weight: ParamTensor::new(format!("{name}.weight"), w), bias: ParamTensor::new(format!("{name}.bias"), b) }
    }

    pub fn zeros(name: &str, input: usize, output: usize) -> Self {
        Self {
            weight: ParamTensor::zeros(format!("{name}.weight"), output, input),
            bias: ParamTensor::zeros(format!("{name}.bias"), 1, output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.value.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.value.nrows()
    }

    pub fn forward(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "`{}` expects {} inputs, got {}",
                self.weight.name,
                self.input_dim(),
                x.ncols()
            )));
        }
        Ok(x.dot(&self.weight.value.t()) + &self.bias.value)
    }

    pub fn backward_input(&self, dy: &Array2<f64>) -> Array2<f64> {
        dy.dot(&self.weight.value)
    }

    /// `[dW, db]` for input `x` and upstream gradient `dy`.
    pub fn param_grads(&self, x: &Array2<f64>, dy: &Array2<f64>) -> [Array2<f64>; 2] {
        let dw = dy.t().dot(x);
        let db = dy.sum_axis(Axis(0)).insert_axis(Axis(0));
        [dw, db]
    }
}

impl Module for Linear {
    fn params(&self) -> Vec<&ParamTensor> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut ParamTensor> {
        vec![&mut self.weight, &mut self.bias]
    }
}

/// Architecture of a multilayer perceptron: `layer_widths` lists each
/// layer's output width, so the last entry is the network's output size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub layer_widths: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl MlpSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layer_widths.is_empty() {
            return Err(Error::Config("MLP needs at least one layer".into()));
        }
        if self.input_dim == 0 || self.layer_widths.contains(&0) {
            return Err(Error::Config("MLP widths must be > 0".into()));
        }
        if self.hidden_activation == Activation::Softmax {
            return Err(Error::Config("softmax is only supported as an output activation".into()));
        }
        Ok(())
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_widths.last().unwrap_or(&0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub layers: Vec<Linear>,
}

/// Intermediates kept by [`Mlp::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
    output: Array2<f64>,
}

impl MlpCache {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }

    pub fn rows(&self) -> usize {
        self.output.nrows()
    }
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(name: &str, spec: MlpSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let mut layers = Vec::with_capacity(spec.layer_widths.len());
        let mut input = spec.input_dim;
        for (i, &w) in spec.layer_widths.iter().enumerate() {
            layers.push(Linear::new(&format!("{name}.{i}"), input, w, rng));
            input = w;
        }
        Ok(Self { spec, layers })
    }

    pub fn zeros(name: &str, spec: MlpSpec) -> Result<Self> {
        spec.validate()?;
        let mut layers = Vec::with_capacity(spec.layer_widths.len());
        let mut input = spec.input_dim;
        for (i, &w) in spec.layer_widths.iter().enumerate() {
            layers.push(Linear::zeros(&format!("{name}.{i}"), input, w));
            input = w;
        }
        Ok(Self { spec, layers })
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.spec.output_activation
        } else {
            self.spec.hidden_activation
        }
    }

    pub fn forward(&self, x: &Array2<f64>) -> Result<(Array2<f64>, MlpCache)> {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(&h)?;
            let y = self.activation(i).apply(&z);
            inputs.push(h);
            pre.push(z);
            h = y;
        }
        let out = h.clone();
        Ok((out, MlpCache { inputs, pre, output: h }))
    }

    pub fn forward_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = Array2::from_shape_vec((1, x.len()), x.to_vec()).map_err(|e| Error::Shape(e.to_string()))?;
        Ok(self.forward(&x)?.0.into_raw_vec_and_offset().0)
    }

    /// Reverse pass. Returns the input gradient and, when `want_params` is
    /// set, parameter gradients in [`Module::params`] order. Parameters are
    /// not touched; use [`Module::accumulate_grads`] to apply.
    pub fn backward(
        &self,
        cache: &MlpCache,
        dy: &Array2<f64>,
        want_params: bool,
    ) -> Result<(Array2<f64>, Option<Vec<Array2<f64>>>)> {
        if cache.pre.len() != self.layers.len() {
            return Err(Error::Usage(format!(
                "cache holds {} layers, network has {}",
                cache.pre.len(),
                self.layers.len()
            )));
        }
        if dy.dim() != cache.output.dim() {
            return Err(Error::Shape(format!("output gradient {:?} vs output {:?}", dy.dim(), cache.output.dim())));
        }
        let mut grads = want_params.then(|| vec![Array2::zeros((0, 0)); 2 * self.layers.len()]);
        let mut g = dy.clone();
        for i in (0..self.layers.len()).rev() {
            let y = if i + 1 == self.layers.len() { &cache.output } else { &cache.inputs[i + 1] };
            let dz = self.activation(i).backward(&cache.pre[i], y, &g);
            if let Some(grads) = grads.as_mut() {
                let [dw, db] = self.layers[i].param_grads(&cache.inputs[i], &dz);
                grads[2 * i] = dw;
                grads[2 * i + 1] = db;
            }
            g = self.layers[i].backward_input(&dz);
        }
        Ok((g, grads))
    }
}

impl Module for Mlp {
    fn params(&self) -> Vec<&ParamTensor> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut ParamTensor> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }
}
