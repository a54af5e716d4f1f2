//! Reparameterized Gaussian policy squashed onto the unit interval.
//!
//! With pre-squash sample `u = mean + std * xi`, the action is
//! `a = (tanh(u) + 1) / 2`, so `da/du = (1 - tanh(u)^2) / 2` and
//!
//! ```text
//! log pi(a) = sum_i [ -xi_i^2/2 - log std_i - log(2 pi)/2 - log((1 - tanh(u_i)^2) / 2) ]
//! ```

use ndarray::{Array1, Array2, Zip};
use rand::Rng;
use rand_distr::StandardNormal;

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `log((1 - tanh(u)^2) / 2)` without cancellation for large `|u|`.
fn log_squash_jacobian(u: f64) -> f64 {
    std::f64::consts::LN_2 - 2.0 * u - 2.0 * softplus(-2.0 * u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquashedGaussian {
    pub log_std_min: f64,
    pub log_std_max: f64,
}

impl Default for SquashedGaussian {
    fn default() -> Self {
        Self { log_std_min: LOG_STD_MIN, log_std_max: LOG_STD_MAX }
    }
}

/// A batch of sampled actions with what the reverse pass needs.
#[derive(Debug, Clone)]
pub struct PolicySample {
    pub action: Array2<f64>,
    pub log_prob: Array1<f64>,
    pub noise: Array2<f64>,
    pub log_std: Array2<f64>,
    squashed: Array2<f64>,
    clamped: Array2<bool>,
}

pub fn standard_normal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample(StandardNormal))
}

impl SquashedGaussian {
    /// Samples with caller-supplied standard-normal `noise` (same shape as
    /// `mean`).
    pub fn sample(&self, mean: &Array2<f64>, log_std_raw: &Array2<f64>, noise: Array2<f64>) -> PolicySample {
        let clamped = log_std_raw.mapv(|s| s < self.log_std_min || s > self.log_std_max);
        let log_std = log_std_raw.mapv(|s| s.clamp(self.log_std_min, self.log_std_max));
        let mut u = mean.clone();
        Zip::from(&mut u).and(&log_std).and(&noise).for_each(|u, &ls, &xi| *u += ls.exp() * xi);
        let squashed = u.mapv(f64::tanh);
        let action = squashed.mapv(|t| 0.5 * (t + 1.0));
        let mut log_prob = Array1::zeros(mean.nrows());
        for r in 0..mean.nrows() {
            let mut lp = 0.0;
            for c in 0..mean.ncols() {
                let xi = noise[[r, c]];
                lp += -0.5 * xi * xi - log_std[[r, c]] - HALF_LN_2PI - log_squash_jacobian(u[[r, c]]);
            }
            log_prob[r] = lp;
        }
        PolicySample { action, log_prob, noise, log_std, squashed, clamped }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, mean: &Array2<f64>, log_std_raw: &Array2<f64>, rng: &mut R) -> PolicySample {
        let noise = standard_normal(mean.nrows(), mean.ncols(), rng);
        self.sample(mean, log_std_raw, noise)
    }

    /// Pathwise gradients of a loss with respect to `mean` and the raw
    /// (pre-clamp) `log_std`, given the loss gradients with respect to the
    /// action and to the log-probability. The noise is held fixed.
    pub fn backward(
        &self,
        s: &PolicySample,
        d_action: &Array2<f64>,
        d_log_prob: &Array1<f64>,
    ) -> (Array2<f64>, Array2<f64>) {
        let (rows, cols) = s.action.dim();
        let mut d_mean = Array2::zeros((rows, cols));
        let mut d_log_std = Array2::zeros((rows, cols));
        for r in 0..rows {
            let dlp = d_log_prob[r];
            for c in 0..cols {
                let t = s.squashed[[r, c]];
                // d log pi / d u = 2 tanh(u) with xi fixed
                let g_u = d_action[[r, c]] * 0.5 * (1.0 - t * t) + dlp * 2.0 * t;
                d_mean[[r, c]] = g_u;
                if !s.clamped[[r, c]] {
                    let std = s.log_std[[r, c]].exp();
                    d_log_std[[r, c]] = g_u * std * s.noise[[r, c]] - dlp;
                }
            }
        }
        (d_mean, d_log_std)
    }

    /// Log-density of a given action under the squashed Gaussian.
    pub fn log_prob_of(&self, action: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
        action
            .iter()
            .zip(mean)
            .zip(log_std)
            .map(|((&a, &m), &ls)| {
                let ls = ls.clamp(self.log_std_min, self.log_std_max);
                let u = (2.0 * a - 1.0).atanh();
                let xi = (u - m) / ls.exp();
                -0.5 * xi * xi - ls - HALF_LN_2PI - log_squash_jacobian(u)
            })
            .sum()
    }
}

/// Single reparameterized draw: squashed action in `(0, 1)^L` and its
/// log-probability.
pub fn gaussian_policy_sample<R: Rng + ?Sized>(mean: &[f64], log_std: &[f64], rng: &mut R) -> (Vec<f64>, f64) {
    let m = Array2::from_shape_vec((1, mean.len()), mean.to_vec()).expect("row vector");
    let s = Array2::from_shape_vec((1, log_std.len()), log_std.to_vec()).expect("row vector");
    let out = SquashedGaussian::default().sample_with(&m, &s, rng);
    (out.action.into_raw_vec_and_offset().0, out.log_prob[0])
}
