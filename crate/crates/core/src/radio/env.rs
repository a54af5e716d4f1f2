use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use super::channel::{norm, sample_channel, UEState};
use super::config::{QosKind, RadioConfig, RadioModel, SliceDefaults, SliceSpec};
use super::qos::{qos_metrics, Packet, QoSReport, SlotSample};
use super::rate::{ue_rates_unchecked, Allocation};
use crate::error::{Error, Result};
use crate::mdp::largest_remainder;

/// Environment settings shared by every DU of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub radio: RadioConfig,
    pub slices: SliceDefaults,
    pub ues_per_du: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self { radio: RadioConfig::default(), slices: SliceDefaults::default(), ues_per_du: 50 }
    }
}

pub const N_SLICES: usize = 3;

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        if self.ues_per_du < N_SLICES {
            return Err(Error::Config(format!(
                "env: ues_per_du must be at least {N_SLICES} so every slice has a UE"
            )));
        }
        for s in self.slices.build(self.ues_per_du) {
            s.validate()?;
        }
        Ok(())
    }
}

/// Splits `total` UEs over `parts` slices with flat-Dirichlet weights and
/// largest-remainder rounding; every slice keeps at least one UE.
pub fn partition_population<R: Rng + ?Sized>(total: usize, parts: usize, rng: &mut R) -> Vec<usize> {
    assert!(parts > 0 && total >= parts, "need at least one UE per slice");
    let draws: Vec<f64> = (0..parts).map(|_| Exp1.sample(rng)).collect();
    let sum: f64 = draws.iter().sum();
    let weights: Vec<f64> = draws.iter().map(|d| d / sum).collect();
    let mut counts = largest_remainder(&weights, total);
    // hand missing UEs back to empty slices, taking from the largest
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let (richest, _) = counts.iter().enumerate().max_by_key(|&(i, &c)| (c, usize::MAX - i)).unwrap();
        counts[richest] -= 1;
        counts[empty] += 1;
    }
    counts
}

/// Per-step result of [`DuEnvironment::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub qos: QoSReport,
    /// Slice rates averaged over the step's slots (bps).
    pub slice_rate_bps: Vec<f64>,
}

/// Downlink OFDMA cell of one distributed unit: UE mobility, on/off traffic,
/// URLLC queues, fading and interference.
///
/// The environment owns its random stream; two instances built with the same
/// seed and inputs evolve bit-identically.
#[derive(Debug, Clone)]
pub struct DuEnvironment {
    model: RadioModel,
    slices: Vec<SliceSpec>,
    populations: Vec<usize>,
    ues: Vec<UEState>,
    rng: ChaCha8Rng,
}

impl DuEnvironment {
    pub fn new(model: RadioModel, slices: Vec<SliceSpec>, populations: Vec<usize>, seed: u64) -> Result<Self> {
        Self::with_rng(model, slices, populations, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_rng(
        model: RadioModel,
        slices: Vec<SliceSpec>,
        populations: Vec<usize>,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if slices.len() != populations.len() {
            return Err(Error::Shape(format!(
                "{} slices but {} population entries",
                slices.len(),
                populations.len()
            )));
        }
        for s in &slices {
            s.validate()?;
        }
        let mut env = Self { model, slices, populations, ues: Vec::new(), rng };
        env.reset();
        Ok(env)
    }

    /// Builds DU `index` of a run: population split and stream are both
    /// derived from the run seed (stream `index` of a ChaCha8 generator
    /// seeded with `seed`).
    pub fn for_du(cfg: &EnvConfig, seed: u64, index: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let populations = partition_population(cfg.ues_per_du, N_SLICES, &mut rng);
        let slices = cfg.slices.build(populations[1]);
        Self::with_rng(cfg.radio.resolve()?, slices, populations, rng)
    }

    pub fn model(&self) -> &RadioModel {
        &self.model
    }

    pub fn slices(&self) -> &[SliceSpec] {
        &self.slices
    }

    pub fn populations(&self) -> &[usize] {
        &self.populations
    }

    pub fn ues(&self) -> &[UEState] {
        &self.ues
    }

    pub fn n_ues(&self) -> usize {
        self.ues.len()
    }

    pub fn ue_slices(&self) -> Vec<usize> {
        self.ues.iter().map(|u| u.slice_id).collect()
    }

    /// Re-places all UEs uniformly in the cell annulus, clears queues and
    /// draws session state from each slice's stationary activity.
    pub fn reset(&mut self) {
        let mut ues = Vec::with_capacity(self.populations.iter().sum());
        let mut id = 0;
        for (slice, count) in self.populations.clone().into_iter().enumerate() {
            let p_active = self.slices[slice].stationary_activity();
            for _ in 0..count {
                let pos = self.random_point();
                let mut ue = UEState::new(id, slice, pos, self.model.min_distance_m);
                ue.waypoint_m = self.random_point();
                ue.active = self.rng.random::<f64>() < p_active;
                ues.push(ue);
                id += 1;
            }
        }
        self.ues = ues;
    }

    fn random_point(&mut self) -> [f64; 2] {
        let r_min = self.model.min_distance_m;
        let r_max = self.model.cell_radius_m;
        let u: f64 = self.rng.random();
        let r = (u * (r_max * r_max - r_min * r_min) + r_min * r_min).sqrt();
        let theta = self.rng.random::<f64>() * std::f64::consts::TAU;
        [r * theta.cos(), r * theta.sin()]
    }

    /// Advances `slots_per_step` slots under a fixed allocation and returns the
    /// step's QoS report.
    pub fn step(&mut self, alloc: &Allocation) -> Result<StepOutcome> {
        let ue_slices = self.ue_slices();
        if alloc.total_rbs() != self.model.total_rbs {
            return Err(Error::Shape(format!(
                "allocation has {} RBs, cell has {}",
                alloc.total_rbs(),
                self.model.total_rbs
            )));
        }
        if alloc.slice_rb.nrows() != self.slices.len() {
            return Err(Error::Shape("allocation slice count mismatch".into()));
        }
        alloc.validate(&ue_slices)?;

        let dt = self.model.slot_duration_s;
        let mut window = Vec::with_capacity(self.model.slots_per_step);
        let mut slice_rate = vec![0.0; self.slices.len()];
        for _ in 0..self.model.slots_per_step {
            let ch = sample_channel(&self.model, &self.ues, &mut self.rng)?;
            let capacity = ue_rates_unchecked(&self.model, &ch, alloc, &self.ues);
            let rates: Vec<f64> =
                capacity.iter().zip(&self.ues).map(|(&c, ue)| if ue.active { c } else { 0.0 }).collect();
            for (r, ue) in rates.iter().zip(&self.ues) {
                slice_rate[ue.slice_id] += r;
            }

            let mut arrivals = Vec::new();
            for n in 0..self.ues.len() {
                let spec = &self.slices[self.ues[n].slice_id];
                if spec.qos_kind != QosKind::MaxDelay || !self.ues[n].active {
                    continue;
                }
                let mean = spec.packet_rate_hz * dt;
                if mean <= 0.0 {
                    continue;
                }
                let count = Poisson::new(mean).map_err(|e| Error::InvalidInput(e.to_string()))?.sample(&mut self.rng) as usize;
                let size = Exp::new(1.0 / spec.packet_mean_bits).map_err(|e| Error::InvalidInput(e.to_string()))?;
                for _ in 0..count {
                    let bits = size.sample(&mut self.rng);
                    arrivals.push(Packet { ue: n, bits, queue_ahead_bits: self.ues[n].queue_bits });
                    self.ues[n].queue_bits += bits;
                }
            }
            for (ue, r) in self.ues.iter_mut().zip(&rates) {
                ue.queue_bits = (ue.queue_bits - r * dt).max(0.0);
            }
            window.push(SlotSample { rates_bps: rates, active: self.ues.iter().map(|u| u.active).collect(), arrivals });

            self.move_ues();
            self.toggle_activity();
        }
        let qos = qos_metrics(&self.model, &self.slices, &ue_slices, &window)?;
        let slots = self.model.slots_per_step as f64;
        slice_rate.iter_mut().for_each(|r| *r /= slots);
        Ok(StepOutcome { qos, slice_rate_bps: slice_rate })
    }

    fn move_ues(&mut self) {
        let hop = self.model.ue_speed_mps * self.model.slot_duration_s;
        if hop == 0.0 {
            return;
        }
        for n in 0..self.ues.len() {
            let ue = &self.ues[n];
            let dx = ue.waypoint_m[0] - ue.position_m[0];
            let dy = ue.waypoint_m[1] - ue.position_m[1];
            let gap = dx.hypot(dy);
            let mut pos = if gap <= hop {
                ue.waypoint_m
            } else {
                [ue.position_m[0] + hop * dx / gap, ue.position_m[1] + hop * dy / gap]
            };
            let r = norm(pos);
            if r > self.model.cell_radius_m {
                let s = self.model.cell_radius_m / r;
                pos = [pos[0] * s, pos[1] * s];
            }
            let reached = gap <= hop;
            let next_wp = if reached { Some(self.random_point()) } else { None };
            let ue = &mut self.ues[n];
            ue.position_m = pos;
            ue.distance_m = norm(pos).clamp(self.model.min_distance_m, self.model.cell_radius_m);
            if let Some(wp) = next_wp {
                ue.waypoint_m = wp;
            }
        }
    }

    fn toggle_activity(&mut self) {
        let dt = self.model.slot_duration_s;
        for ue in &mut self.ues {
            let spec = &self.slices[ue.slice_id];
            let u: f64 = self.rng.random();
            if ue.active {
                if u < 1.0 - (-dt / spec.mean_session_s).exp() {
                    ue.active = false;
                    ue.queue_bits = 0.0;
                }
            } else if u < 1.0 - (-spec.session_arrival_hz * dt).exp() {
                ue.active = true;
            }
        }
    }

    #[cfg(test)]
    pub(crate) fn ues_mut(&mut self) -> &mut Vec<UEState> {
        &mut self.ues
    }
}
