//! Trains a single actor against the closed-form critic
//! `Q(s, a) = -|a - a*|^2` and reports how fast its deterministic action
//! reaches the target.
//!
//! ```text
//! cargo run --release --example sac_synthetic -- [targets] [max_updates]
//! ```

use ndarray::Array2;
use oran_slicing::actor::{ActMode, ActorConfig, ActorNet, SacActor, SyntheticCritic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> oran_slicing::Result<()> {
    let mut args = std::env::args().skip(1);
    let targets: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let max_updates: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let cfg = ActorConfig { lr: 1e-3, beta_temp: 1e-3, ..Default::default() };

    for t in 0..targets {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + t);
        let target: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..0.9)).collect();
        let mut actor = SacActor::new(ActorNet::new(0, 9, 3, &cfg, &mut rng)?, &cfg);
        let goal = target.clone();
        let critic = SyntheticCritic {
            q: move |a: &[f64]| -a.iter().zip(&goal).map(|(x, g)| (x - g).powi(2)).sum::<f64>(),
            grad: {
                let goal = target.clone();
                move |a: &[f64]| a.iter().zip(&goal).map(|(x, g)| -2.0 * (x - g)).collect()
            },
        };
        let probe: Vec<f64> = (0..9).map(|_| rng.random_range(0.0..1.0)).collect();
        let distance = |actor: &SacActor, rng: &mut ChaCha8Rng| -> oran_slicing::Result<f64> {
            let (a, _) = actor.net.act(&probe, ActMode::Deterministic, rng)?;
            Ok(a.slice_fractions.iter().zip(&target).map(|(x, g)| (x - g).powi(2)).sum::<f64>().sqrt())
        };

        let mut reached = None;
        for k in 1..=max_updates {
            let obs = Array2::from_shape_fn((64, 9), |_| rng.random_range(0.0..1.0));
            let acts = Array2::zeros((64, 3));
            actor.policy_update(&[obs], &[acts], &critic, &mut rng)?;
            if k % 50 == 0 && distance(&actor, &mut rng)? < 0.05 {
                reached = Some(k);
                break;
            }
        }
        let d = distance(&actor, &mut rng)?;
        let shown: Vec<String> = target.iter().map(|v| format!("{v:.3}")).collect();
        match reached {
            Some(k) => println!("a* = [{}]: within 0.05 after {k} updates (distance {d:.4})", shown.join(", ")),
            None => println!("a* = [{}]: distance {d:.4} after {max_updates} updates", shown.join(", ")),
        }
    }
    Ok(())
}
