use super::config::{QosKind, RadioModel, SliceSpec};
use crate::error::{Error, Result};

/// A URLLC packet arriving during a slot, with the backlog already queued
/// ahead of it at the same UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    pub ue: usize,
    pub bits: f64,
    pub queue_ahead_bits: f64,
}

/// Everything the QoS metrics need to know about one slot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlotSample {
    pub rates_bps: Vec<f64>,
    pub active: Vec<bool>,
    pub arrivals: Vec<Packet>,
}

/// Achieved QoS over one step window.
#[derive(Debug, Clone, PartialEq)]
pub struct QoSReport {
    /// Window-level `Q_l` in the slice's own units.
    pub per_slice_value: Vec<f64>,
    /// Fraction of evaluable slots with `|Q_l(slot) - lambda_l| <= epsilon_l`.
    pub per_slice_satisfied_fraction: Vec<f64>,
    /// Window-mean served rate of every UE.
    pub per_user_throughput_bps: Vec<f64>,
}

impl QoSReport {
    pub fn n_slices(&self) -> usize {
        self.per_slice_value.len()
    }

    pub fn violation(&self, slice: usize) -> f64 {
        1.0 - self.per_slice_satisfied_fraction[slice]
    }
}

fn within(value: f64, spec: &SliceSpec) -> bool {
    (value - spec.lambda_target).abs() <= spec.epsilon_margin
}

/// Delay of a packet served at `rate_bps`, capped at `cap_s`. A zero rate
/// yields the cap.
pub fn packet_delay(packet: &Packet, rate_bps: f64, cap_s: f64) -> f64 {
    if rate_bps <= 0.0 {
        return cap_s;
    }
    ((packet.queue_ahead_bits + packet.bits) / rate_bps).min(cap_s)
}

/// Computes per-slice QoS over a window of `slots_per_step` slots.
///
/// Per slot:
/// * throughput slices: mean rate over the slice's active UEs;
/// * connection-density slices: number of active UEs at or above the
///   slice's `min_rate_bps`;
/// * delay slices: the largest delay among packets arriving in the slot.
///
/// Slots where a throughput slice has no active UE, or a delay slice sees no
/// arrival, carry no QoS sample and are left out of the satisfaction
/// frequency. A slice with no evaluable slot reports a fraction of one.
pub fn qos_metrics(
    model: &RadioModel,
    slices: &[SliceSpec],
    ue_slices: &[usize],
    window: &[SlotSample],
) -> Result<QoSReport> {
    if window.len() != model.slots_per_step {
        return Err(Error::Shape(format!(
            "window has {} slots, expected {}",
            window.len(),
            model.slots_per_step
        )));
    }
    let n_ues = ue_slices.len();
    for (t, s) in window.iter().enumerate() {
        if s.rates_bps.len() != n_ues || s.active.len() != n_ues {
            return Err(Error::Shape(format!("slot {t} does not cover {n_ues} UEs")));
        }
        if s.arrivals.iter().any(|p| p.ue >= n_ues) {
            return Err(Error::Shape(format!("slot {t} has a packet for an unknown UE")));
        }
    }
    if let Some(&bad) = ue_slices.iter().find(|&&l| l >= slices.len()) {
        return Err(Error::Shape(format!("UE slice index {bad} >= {} slices", slices.len())));
    }

    let slots = window.len() as f64;
    let cap = model.window_duration_s();
    let mut per_user = vec![0.0; n_ues];
    for s in window {
        for (acc, r) in per_user.iter_mut().zip(&s.rates_bps) {
            *acc += r;
        }
    }
    per_user.iter_mut().for_each(|r| *r /= slots);

    let mut values = Vec::with_capacity(slices.len());
    let mut fractions = Vec::with_capacity(slices.len());
    for (l, spec) in slices.iter().enumerate() {
        let members: Vec<usize> = (0..n_ues).filter(|&n| ue_slices[n] == l).collect();
        let mut satisfied = 0usize;
        let mut evaluable = 0usize;
        let mut slot_values = Vec::new();
        for s in window {
            let q = match spec.qos_kind {
                QosKind::Throughput => {
                    let active: Vec<f64> =
                        members.iter().filter(|&&n| s.active[n]).map(|&n| s.rates_bps[n]).collect();
                    (!active.is_empty()).then(|| active.iter().sum::<f64>() / active.len() as f64)
                }
                QosKind::ConnectionDensity => Some(
                    members
                        .iter()
                        .filter(|&&n| s.active[n] && s.rates_bps[n] >= spec.min_rate_bps)
                        .count() as f64,
                ),
                QosKind::MaxDelay => s
                    .arrivals
                    .iter()
                    .filter(|p| ue_slices[p.ue] == l)
                    .map(|p| packet_delay(p, s.rates_bps[p.ue], cap))
                    .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d)))),
            };
            if let Some(q) = q {
                evaluable += 1;
                satisfied += within(q, spec) as usize;
                slot_values.push(q);
            }
        }
        let value = match spec.qos_kind {
            QosKind::Throughput => {
                if slot_values.is_empty() {
                    0.0
                } else {
                    slot_values.iter().sum::<f64>() / slot_values.len() as f64
                }
            }
            QosKind::ConnectionDensity => {
                members.iter().filter(|&&n| per_user[n] >= spec.min_rate_bps).count() as f64
            }
            QosKind::MaxDelay => slot_values.iter().copied().fold(0.0, f64::max),
        };
        values.push(value);
        fractions.push(if evaluable == 0 { 1.0 } else { satisfied as f64 / evaluable as f64 });
    }
    Ok(QoSReport {
        per_slice_value: values,
        per_slice_satisfied_fraction: fractions,
        per_user_throughput_bps: per_user,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::config::{RadioConfig, SliceDefaults};

    fn model(slots: usize) -> RadioModel {
        let mut cfg = RadioConfig::default();
        cfg.slots_per_step = slots;
        cfg.resolve().unwrap()
    }

    fn constant_window(slots: usize, rates: &[f64]) -> Vec<SlotSample> {
        (0..slots)
            .map(|_| SlotSample {
                rates_bps: rates.to_vec(),
                active: vec![true; rates.len()],
                arrivals: vec![],
            })
            .collect()
    }

    #[test]
    fn zero_rates_in_embb() {
        let m = model(4);
        let slices = SliceDefaults::default().build(1);
        let r = qos_metrics(&m, &slices, &[0, 0], &constant_window(4, &[0.0, 0.0])).unwrap();
        assert_eq!(r.per_slice_value[0], 0.0);
        assert_eq!(r.per_slice_satisfied_fraction[0], 0.0);
    }

    #[test]
    fn exact_target_is_fully_satisfied() {
        let m = model(5);
        let slices = SliceDefaults::default().build(1);
        let lambda = slices[0].lambda_target;
        let r = qos_metrics(&m, &slices, &[0, 0, 0], &constant_window(5, &[lambda; 3])).unwrap();
        assert_eq!(r.per_slice_satisfied_fraction[0], 1.0);
        assert_eq!(r.per_slice_value[0], lambda);
    }

    #[test]
    fn mtc_count_on_fixture() {
        let rates = [50e3, 400e3, 120e3, 900e3, 250e3];
        // sort-and-count oracle with a threshold between the 2nd and 3rd
        // largest mean rates
        let mut sorted = rates.to_vec();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let threshold = 0.5 * (sorted[2] + sorted[3]);
        let expected = sorted.iter().filter(|&&r| r >= threshold).count();
        assert_eq!(expected, 3);

        let m = model(3);
        let mut slices = SliceDefaults::default().build(5);
        slices[1].min_rate_bps = threshold;
        let ue_slices = [1; 5];
        let r = qos_metrics(&m, &slices, &ue_slices, &constant_window(3, &rates)).unwrap();
        assert_eq!(r.per_slice_value[1], expected as f64);
    }

    #[test]
    fn zero_rate_packet_gets_window_cap() {
        let m = model(2);
        let slices = SliceDefaults::default().build(1);
        let mut w = constant_window(2, &[0.0]);
        w[0].arrivals.push(Packet { ue: 0, bits: 1e4, queue_ahead_bits: 5e3 });
        let r = qos_metrics(&m, &slices, &[2], &w).unwrap();
        assert_eq!(r.per_slice_value[2], m.window_duration_s());
        assert!(r.per_slice_value[2].is_finite());
    }

    #[test]
    fn urllc_delay_band() {
        let mut m = model(2);
        // a 40 ms window so the 10 ms delay is not capped
        m.slot_duration_s = 0.02;
        let slices = SliceDefaults::default().build(1);
        // 10 kb at 1 Mbps = 10 ms, the target; 10 kb at 10 Mbps = 1 ms, too fast
        let mut w = constant_window(2, &[1e6]);
        w[0].arrivals.push(Packet { ue: 0, bits: 1e4, queue_ahead_bits: 0.0 });
        w[1].rates_bps = vec![1e7];
        w[1].arrivals.push(Packet { ue: 0, bits: 1e4, queue_ahead_bits: 0.0 });
        let r = qos_metrics(&m, &slices, &[2], &w).unwrap();
        assert_eq!(r.per_slice_satisfied_fraction[2], 0.5);
        assert!((r.per_slice_value[2] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn wrong_window_length_is_rejected() {
        let m = model(4);
        let slices = SliceDefaults::default().build(1);
        assert!(qos_metrics(&m, &slices, &[0], &constant_window(3, &[1.0])).is_err());
    }

    #[test]
    fn satisfied_fraction_ignores_ue_labels() {
        let m = model(6);
        let slices = SliceDefaults::default().build(3);
        let ue_slices = [0, 1, 0, 1, 1, 0];
        let base: Vec<SlotSample> = (0..6)
            .map(|t| SlotSample {
                rates_bps: (0..6).map(|n| ((t * 7 + n * 13) % 9) as f64 * 4e5).collect(),
                active: (0..6).map(|n| (t + n) % 4 != 0).collect(),
                arrivals: vec![],
            })
            .collect();
        // swap UE 0 and UE 2 (both eMBB) and UE 1 and UE 4 (both MTC)
        let perm = [2, 4, 0, 3, 1, 5];
        let permuted: Vec<SlotSample> = base
            .iter()
            .map(|s| SlotSample {
                rates_bps: perm.iter().map(|&p| s.rates_bps[p]).collect(),
                active: perm.iter().map(|&p| s.active[p]).collect(),
                arrivals: vec![],
            })
            .collect();
        let a = qos_metrics(&m, &slices, &ue_slices, &base).unwrap();
        let b = qos_metrics(&m, &slices, &ue_slices, &permuted).unwrap();
        assert_eq!(a.per_slice_satisfied_fraction, b.per_slice_satisfied_fraction);
    }
}
