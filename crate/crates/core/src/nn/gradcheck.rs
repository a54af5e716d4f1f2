//! Central finite-difference checks for the hand-written reverse passes.
//!
//! Relative error here is `|g_a - g_n|_2 / max(|g_a|_2, |g_n|_2)` over the
//! probed coordinates of one tensor; the checks report the worst tensor.

use ndarray::Array2;

use super::tensor::Module;

pub const FD_STEP: f64 = 1e-5;

/// Coordinates probed per tensor; large tensors are sampled with a fixed
/// stride so the check stays cheap and deterministic.
pub const MAX_COORDS: usize = 24;

pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let na = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nn = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
    let scale = na.max(nn);
    if scale < 1e-14 {
        diff
    } else {
        diff / scale
    }
}

fn probe(len: usize) -> Vec<usize> {
    if len <= MAX_COORDS {
        (0..len).collect()
    } else {
        let stride = len / MAX_COORDS;
        (0..MAX_COORDS).map(|i| (i * stride + i % stride.max(1)) % len).collect()
    }
}

/// Compares `analytic` (one gradient per parameter, in `params()` order)
/// against central differences of `loss`; returns the worst tensor's error.
pub fn check_param_grads<M: Module + Clone>(model: &M, loss: &dyn Fn(&M) -> f64, analytic: &[Array2<f64>]) -> f64 {
    param_grad_errors(model, loss, analytic).into_iter().map(|(_, e)| e).fold(0.0, f64::max)
}

/// Per-tensor relative errors, named after the parameters.
pub fn param_grad_errors<M: Module + Clone>(
    model: &M,
    loss: &dyn Fn(&M) -> f64,
    analytic: &[Array2<f64>],
) -> Vec<(String, f64)> {
    let mut probe_model = model.clone();
    let n_params = model.params().len();
    assert_eq!(n_params, analytic.len(), "one gradient per parameter");
    let mut out = Vec::with_capacity(n_params);
    for pi in 0..n_params {
        let len = model.params()[pi].len();
        let coords = probe(len);
        let grad = analytic[pi].as_standard_layout();
        let mut a = Vec::with_capacity(coords.len());
        let mut n = Vec::with_capacity(coords.len());
        for &c in &coords {
            let orig = {
                let mut ps = probe_model.params_mut();
                let v = ps[pi].value.as_slice_mut().expect("contiguous parameter");
                let o = v[c];
                v[c] = o + FD_STEP;
                o
            };
            let plus = loss(&probe_model);
            probe_model.params_mut()[pi].value.as_slice_mut().unwrap()[c] = orig - FD_STEP;
            let minus = loss(&probe_model);
            probe_model.params_mut()[pi].value.as_slice_mut().unwrap()[c] = orig;
            n.push((plus - minus) / (2.0 * FD_STEP));
            a.push(grad.as_slice().expect("standard layout")[c]);
        }
        out.push((model.params()[pi].name.clone(), relative_error(&a, &n)));
    }
    out
}

/// Compares the analytic input gradient against central differences.
pub fn check_input_grad<M>(
    model: &M,
    x: &Array2<f64>,
    loss: &dyn Fn(&M, &Array2<f64>) -> f64,
    grad: &dyn Fn(&M, &Array2<f64>) -> Array2<f64>,
) -> f64 {
    let analytic = grad(model, x).as_standard_layout().into_owned();
    let mut xp = x.clone();
    let coords = probe(x.len());
    let mut a = Vec::new();
    let mut n = Vec::new();
    for &c in &coords {
        let orig = xp.as_slice().unwrap()[c];
        xp.as_slice_mut().unwrap()[c] = orig + FD_STEP;
        let plus = loss(model, &xp);
        xp.as_slice_mut().unwrap()[c] = orig - FD_STEP;
        let minus = loss(model, &xp);
        xp.as_slice_mut().unwrap()[c] = orig;
        n.push((plus - minus) / (2.0 * FD_STEP));
        a.push(analytic.as_slice().unwrap()[c]);
    }
    relative_error(&a, &n)
}
