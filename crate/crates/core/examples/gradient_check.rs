//! Finite-difference audit of every hand-written reverse pass: actor,
//! attention critic and the joint-MLP baseline.
//!
//! ```text
//! cargo run --release --example gradient_check -- [draws]
//! ```

use ndarray::{Array1, Array2};
use oran_slicing::actor::{ActorConfig, ActorNet};
use oran_slicing::critic::{AttentionConfig, AttentionCritic, BaselineConfig, BaselineCritic};
use oran_slicing::nn::gradcheck::param_grad_errors;
use oran_slicing::nn::standard_normal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn joint(n: usize, rows: usize, rng: &mut ChaCha8Rng) -> (Vec<Array2<f64>>, Vec<Array2<f64>>) {
    let obs = (0..n).map(|_| Array2::from_shape_fn((rows, 9), |_| rng.random_range(-1.0..1.0))).collect();
    let act = (0..n).map(|_| Array2::from_shape_fn((rows, 3), |_| rng.random_range(0.0..1.0))).collect();
    (obs, act)
}

fn report(label: &str, errs: &[(String, f64)]) {
    let (name, worst) = errs.iter().cloned().fold((String::new(), 0.0), |a, b| if b.1 > a.1 { b } else { a });
    println!("{label:>10}: {} tensors, worst relative error {worst:.2e} ({name})", errs.len());
}

fn main() -> oran_slicing::Result<()> {
    let draws: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    for seed in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        println!("draw {seed}");

        let acfg = ActorConfig { trunk_widths: vec![16, 16], ..Default::default() };
        let net = ActorNet::new(0, 9, 3, &acfg, &mut rng)?;
        let obs = Array2::from_shape_fn((4, 9), |_| rng.random_range(0.0..1.0));
        let noise = standard_normal(4, 3, &mut rng);
        let w = Array2::from_shape_fn((4, 3), |_| rng.random_range(-1.0..1.0));
        let beta = 0.2;
        let loss = |n: &ActorNet| {
            let f = n.forward(&obs, noise.clone()).unwrap();
            (&f.sample.action * &w).sum() + beta * f.sample.log_prob.sum()
        };
        let f = net.forward(&obs, noise.clone())?;
        let grads = net.backward(&f, &w, &Array1::from_elem(4, beta))?;
        report("actor", &param_grad_errors(&net, &loss, &grads));

        let ccfg = AttentionConfig { embed_dim: 6, attn_dim: 4, head_widths: vec![8, 5] };
        let critic = AttentionCritic::new(3, 9, 3, &ccfg, &mut rng)?;
        let (o, a) = joint(3, 4, &mut rng);
        let dq = Array2::from_shape_fn((4, 3), |_| rng.random_range(-1.0..1.0));
        let loss = |m: &AttentionCritic| (m.forward(&o, &a).unwrap().0 * &dq).sum();
        let (_, cache) = critic.forward(&o, &a)?;
        let grads = critic.backward(&cache, &dq, true)?.1.expect("parameter gradients");
        report("attention", &param_grad_errors(&critic, &loss, &grads));

        let base = BaselineCritic::new(3, 9, 3, &BaselineConfig { widths: vec![8, 8] }, &mut rng)?;
        let loss = |m: &BaselineCritic| (m.forward(&o, &a).unwrap().0 * &dq).sum();
        let (_, cache) = base.forward(&o, &a)?;
        let grads = base.backward(&cache, &dq, true)?.1.expect("parameter gradients");
        report("baseline", &param_grad_errors(&base, &loss, &grads));
    }
    Ok(())
}
