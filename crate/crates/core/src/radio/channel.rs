use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::config::RadioModel;
use crate::error::{Error, Result};

/// One user equipment attached to the serving O-RU.
#[derive(Debug, Clone, PartialEq)]
pub struct UEState {
    pub ue_id: usize,
    pub slice_id: usize,
    pub position_m: [f64; 2],
    /// Distance to the serving O-RU, floored at the model's minimum distance.
    pub distance_m: f64,
    pub active: bool,
    pub queue_bits: f64,
    pub waypoint_m: [f64; 2],
}

impl UEState {
    pub fn new(ue_id: usize, slice_id: usize, position_m: [f64; 2], min_distance_m: f64) -> Self {
        let distance_m = norm(position_m).max(min_distance_m);
        Self {
            ue_id,
            slice_id,
            position_m,
            distance_m,
            active: true,
            queue_bits: 0.0,
            waypoint_m: position_m,
        }
    }
}

pub(crate) fn norm(p: [f64; 2]) -> f64 {
    p[0].hypot(p[1])
}

/// Per-slot fading gains `|h|^2` and neighbor interference, indexed (UE, RB).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub gains: Array2<f64>,
    pub interference_mw: Array2<f64>,
}

impl ChannelState {
    pub fn n_ues(&self) -> usize {
        self.gains.nrows()
    }
}

/// Draws one slot of Rayleigh block fading and neighbor interference.
///
/// Gains are `|h|^2` with `h` unit-variance circular complex Gaussian, which
/// makes them exponential with mean one. Each neighbor O-RU transmits on each
/// RB independently with the configured activity probability; an active
/// neighbor contributes `p_u * d^-eta * |g|^2` with its own fresh fading `g`.
pub fn sample_channel<R: Rng + ?Sized>(
    model: &RadioModel,
    ues: &[UEState],
    rng: &mut R,
) -> Result<ChannelState> {
    let k = model.total_rbs;
    let n = ues.len();
    for ue in ues {
        if !ue.distance_m.is_finite() || !(ue.distance_m > 0.0) {
            return Err(Error::InvalidInput(format!(
                "UE {} has non-finite or non-positive distance {}",
                ue.ue_id, ue.distance_m
            )));
        }
        if !ue.position_m.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput(format!("UE {} has non-finite position", ue.ue_id)));
        }
    }
    let mut gains = Array2::zeros((n, k));
    let mut interference = Array2::zeros((n, k));
    if n == 0 {
        return Ok(ChannelState { gains, interference_mw: interference });
    }

    let n_nb = model.neighbor_positions.len();
    // activity[j * k + rb]: whether neighbor j transmits on rb this slot
    let activity: Vec<bool> = (0..n_nb * k)
        .map(|_| rng.random::<f64>() < model.neighbor_activity_prob)
        .collect();

    let eta = model.path_loss_exponent;
    for (u, ue) in ues.iter().enumerate() {
        let nb_gain: Vec<f64> = model
            .neighbor_positions
            .iter()
            .map(|nb| {
                let d = norm([ue.position_m[0] - nb[0], ue.position_m[1] - nb[1]])
                    .max(model.min_distance_m);
                model.tx_power_mw * d.powf(-eta)
            })
            .collect();
        for rb in 0..k {
            gains[[u, rb]] = Exp1.sample(rng);
            let mut acc = 0.0;
            for j in 0..n_nb {
                if activity[j * k + rb] {
                    let g: f64 = Exp1.sample(rng);
                    acc += nb_gain[j] * g;
                }
            }
            interference[[u, rb]] = acc;
        }
    }
    Ok(ChannelState { gains, interference_mw: interference })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::config::RadioConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ues(n: usize) -> Vec<UEState> {
        (0..n)
            .map(|i| UEState::new(i, i % 3, [20.0 + 10.0 * i as f64, 5.0], 5.0))
            .collect()
    }

    #[test]
    fn no_neighbors_means_no_interference() {
        let mut cfg = RadioConfig::default();
        cfg.neighbor_count = 0;
        let model = cfg.resolve().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = sample_channel(&model, &ues(4), &mut rng).unwrap();
        assert!(ch.interference_mw.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_seed_gives_identical_state() {
        let model = RadioConfig::default().resolve().unwrap();
        let a = sample_channel(&model, &ues(5), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_channel(&model, &ues(5), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let bits = |m: &Array2<f64>| m.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.gains), bits(&b.gains));
        assert_eq!(bits(&a.interference_mw), bits(&b.interference_mw));
    }

    #[test]
    fn empty_ue_set_is_not_an_error() {
        let model = RadioConfig::default().resolve().unwrap();
        let ch = sample_channel(&model, &[], &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(ch.n_ues(), 0);
    }

    #[test]
    fn non_finite_distance_is_rejected() {
        let model = RadioConfig::default().resolve().unwrap();
        let mut u = ues(2);
        u[1].distance_m = f64::NAN;
        let err = sample_channel(&model, &u, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rayleigh_gain_moments() {
        // 10^6 gains: one UE across 10^6 RBs keeps this a single draw.
        let mut cfg = RadioConfig::default();
        cfg.neighbor_count = 0;
        cfg.total_rbs = 1_000_000;
        let model = cfg.resolve().unwrap();
        let ch = sample_channel(&model, &ues(1), &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let n = ch.gains.len() as f64;
        let mean = ch.gains.sum() / n;
        let var = ch.gains.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / n;
        assert!((0.99..=1.01).contains(&mean), "mean {mean}");
        assert!((0.99..=1.01).contains(&var), "var {var}");
        assert!(ch.gains.iter().all(|&g| g >= 0.0));
    }

    #[test]
    fn interference_mean_matches_activity() {
        let mut cfg = RadioConfig::default();
        cfg.neighbor_count = 1;
        cfg.neighbor_activity_prob = 0.25;
        cfg.total_rbs = 200_000;
        let model = cfg.resolve().unwrap();
        let u = vec![UEState::new(0, 0, [0.0, 100.0], 5.0)];
        let ch = sample_channel(&model, &u, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let nb = model.neighbor_positions[0];
        let d = ((nb[0]).powi(2) + (nb[1] - 100.0).powi(2)).sqrt();
        let expected = 0.25 * model.tx_power_mw * d.powf(-3.0);
        let mean = ch.interference_mw.sum() / ch.interference_mw.len() as f64;
        assert!((mean / expected - 1.0).abs() < 0.02, "{mean} vs {expected}");
    }
}
