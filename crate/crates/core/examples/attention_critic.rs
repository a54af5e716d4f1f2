//! Shows what the attention critic looks at: per-agent embeddings, the
//! attention weights each agent puts on the others, and how the weights
//! collapse to uniform when all embeddings coincide.
//!
//! ```text
//! cargo run --release --example attention_critic -- [agents]
//! ```

use ndarray::{Array1, Array2};
use oran_slicing::critic::{AttentionConfig, AttentionCritic};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> oran_slicing::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let critic = AttentionCritic::new(n, 9, 3, &AttentionConfig::default(), &mut rng)?;
    let obs: Vec<Array2<f64>> = (0..n).map(|_| Array2::from_shape_fn((1, 9), |_| rng.random_range(0.0..1.0))).collect();
    let act: Vec<Array2<f64>> = (0..n).map(|_| Array2::from_shape_fn((1, 3), |_| rng.random_range(0.0..1.0))).collect();

    let emb: Vec<Array1<f64>> =
        (0..n).map(|i| critic.embed(i, &obs[i], &act[i]).map(|e| e.row(0).to_owned())).collect::<oran_slicing::Result<_>>()?;
    let (q, cache) = critic.forward(&obs, &act)?;
    println!("{n} agents, embedding width {}, key/query width {}", critic.embed_dim(), critic.attn_dim());
    for i in 0..n {
        let alpha = critic.attention_weights(i, &emb);
        let batched = cache.alphas()[i].row(0);
        let others: Vec<String> = (0..n)
            .filter(|&j| j != i)
            .zip(&alpha)
            .map(|(j, a)| format!("{j}:{a:.3}"))
            .collect();
        let gap = alpha.iter().zip(batched.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!(
            "agent {i}: Q = {:+.4}  attends {}  (sum {:.15}, batched gap {gap:.1e})",
            q[[0, i]],
            others.join(" "),
            alpha.iter().sum::<f64>()
        );
    }

    let same = vec![emb[0].clone(); n];
    let uniform = critic.attention_weights(0, &same);
    let spread = uniform.iter().map(|a| (a - 1.0 / (n - 1) as f64).abs()).fold(0.0, f64::max);
    println!("identical embeddings: weights {uniform:.4?}, max deviation from uniform {spread:.1e}");

    let mut moved = act.clone();
    moved[n - 1][[0, 0]] = 1.0 - moved[n - 1][[0, 0]];
    let q2 = critic.forward(&obs, &moved)?.0;
    println!("changing agent {}'s action moves agent 0's Q by {:+.3e}", n - 1, q2[[0, 0]] - q[[0, 0]]);
    Ok(())
}
