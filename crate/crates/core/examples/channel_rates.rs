//! Draws a few slots of Rayleigh fading for one DU and prints the per-slice
//! rates of an even three-way split, then steps the full environment once.
//!
//! ```text
//! cargo run --example channel_rates -- [seed]
//! ```

use oran_slicing::mdp::{action_to_allocation, compute_reward, ActionVec};
use oran_slicing::radio::{sample_channel, slice_rate, windowed_slice_rate, DuEnvironment, EnvConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> oran_slicing::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = EnvConfig { ues_per_du: 10, ..EnvConfig::default() };
    let mut env = DuEnvironment::for_du(&cfg, seed, 0)?;
    let model = env.model().clone();
    println!(
        "{} RBs of {:.0} kHz, populations {:?} (eMBB, MTC, URLLC)",
        model.total_rbs,
        model.bandwidth_hz / 1e3,
        env.populations()
    );

    let ues = env.ues().to_vec();
    let alloc = action_to_allocation(&ActionVec::new(vec![1.0 / 3.0; 3]), model.total_rbs, &ues)?;
    println!("RBs per slice: {:?}", alloc.slice_counts());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window: Vec<_> = (0..4).map(|_| sample_channel(&model, &ues, &mut rng)).collect::<oran_slicing::Result<_>>()?;
    let mean_gain = window[0].gains.mean().unwrap_or(0.0);
    println!("slot 0: mean |h|^2 {mean_gain:.3}, mean interference {:.3e} mW", window[0].interference_mw.mean().unwrap_or(0.0));
    for (l, spec) in env.slices().iter().enumerate() {
        let (slot0, per_ue) = slice_rate(&model, &window[0], &alloc, &ues, l)?;
        let served = per_ue.iter().filter(|&&r| r > 0.0).count();
        let avg = windowed_slice_rate(&model, &window, &alloc, &ues, l)?;
        println!(
            "{:>6}: slot-0 rate {:8.3} Mbps over {served} UE(s), 4-slot mean {:8.3} Mbps",
            spec.name,
            slot0 / 1e6,
            avg / 1e6
        );
    }

    let out = env.step(&alloc)?;
    println!("\none environment step under the same split:");
    for (l, spec) in env.slices().iter().enumerate() {
        println!(
            "{:>6}: Q = {:.4e}  target {:.4e} +- {:.1e}  satisfied {:.2}",
            spec.name,
            out.qos.per_slice_value[l],
            spec.lambda_target,
            spec.epsilon_margin,
            out.qos.per_slice_satisfied_fraction[l]
        );
    }
    println!("reward {:.3} of {}", compute_reward(&out.qos), env.slices().len());
    Ok(())
}
