//! The slicing MDP: observation encoding, the slice-level action and its MAC
//! scheduler, and the SLA-satisfaction reward.

use crate::error::{Error, Result};
use crate::radio::{Allocation, QoSReport, SliceSpec, UEState};

/// Agent observation `s_t = {Q_l, N_l, a_{t-1}}` for every slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// Achieved QoS divided by each slice's target.
    pub qos_values: Vec<f64>,
    /// Slice population divided by DU population.
    pub ue_density: Vec<f64>,
    pub prev_action: Vec<f64>,
}

impl Observation {
    pub fn zeros(n_slices: usize) -> Self {
        Self {
            qos_values: vec![0.0; n_slices],
            ue_density: vec![0.0; n_slices],
            prev_action: vec![0.0; n_slices],
        }
    }

    pub fn dim(&self) -> usize {
        self.qos_values.len() + self.ue_density.len() + self.prev_action.len()
    }

    /// Flat vector `[qos..., density..., prev_action...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&self.qos_values);
        v.extend_from_slice(&self.ue_density);
        v.extend_from_slice(&self.prev_action);
        v
    }
}

/// Fraction of the K resource blocks requested by each slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionVec {
    pub slice_fractions: Vec<f64>,
}

impl ActionVec {
    pub fn new(slice_fractions: Vec<f64>) -> Self {
        Self { slice_fractions }
    }

    pub fn len(&self) -> usize {
        self.slice_fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slice_fractions.is_empty()
    }

    /// Scales the fractions down to sum to one when they over-subscribe.
    pub fn projected(&self) -> Vec<f64> {
        let sum: f64 = self.slice_fractions.iter().sum();
        if sum > 1.0 {
            self.slice_fractions.iter().map(|a| a / sum).collect()
        } else {
            self.slice_fractions.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Observation,
    pub action: ActionVec,
    pub reward: f64,
    pub next_state: Observation,
    pub agent_id: usize,
}

/// Normalizes a QoS report into an observation. QoS values are divided by
/// each slice's `lambda_target` and are not clamped.
pub fn encode_state(
    qos: &QoSReport,
    slices: &[SliceSpec],
    populations: &[usize],
    prev: &ActionVec,
) -> Result<Observation> {
    let l = slices.len();
    if qos.n_slices() != l || populations.len() != l || prev.len() != l {
        return Err(Error::Shape(format!(
            "expected {l} slice entries, got qos {}, populations {}, action {}",
            qos.n_slices(),
            populations.len(),
            prev.len()
        )));
    }
    let total: usize = populations.iter().sum();
    let qos_values = qos
        .per_slice_value
        .iter()
        .zip(slices)
        .map(|(q, s)| q / s.lambda_target)
        .collect();
    let ue_density = populations
        .iter()
        .map(|&n| if total == 0 { 0.0 } else { n as f64 / total as f64 })
        .collect();
    Ok(Observation { qos_values, ue_density, prev_action: prev.slice_fractions.clone() })
}

/// Largest-remainder apportionment of `total` units by `weights`
/// (nonnegative, summing to at most one). The result sums to
/// `round(total * sum(weights))`, clamped to `total`; ties go to the lower
/// index.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let target = (quotas.iter().sum::<f64>().round() as usize).min(total);
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take(target.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// MAC scheduler: turns slice fractions into a feasible allocation.
///
/// Fractions over-subscribing the band are projected onto the simplex, then
/// apportioned to whole RBs by largest remainder. Slice `l` receives a
/// contiguous block after slices `0..l`, and within a slice the blocks are
/// dealt round-robin to its active UEs in id order.
pub fn action_to_allocation(a: &ActionVec, total_rbs: usize, ues: &[UEState]) -> Result<Allocation> {
    let n_slices = a.len();
    if let Some(bad) = a.slice_fractions.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidInput(format!("slice fraction {bad} outside [0, 1]")));
    }
    if let Some(ue) = ues.iter().find(|u| u.slice_id >= n_slices) {
        return Err(Error::Shape(format!("UE {} in slice {} of {n_slices}", ue.ue_id, ue.slice_id)));
    }
    let mut alloc = Allocation::empty(n_slices, ues.len(), total_rbs);
    if total_rbs == 0 {
        return Ok(alloc);
    }
    let counts = largest_remainder(&a.projected(), total_rbs);
    let mut start = 0;
    for (l, &count) in counts.iter().enumerate() {
        let active: Vec<usize> = ues
            .iter()
            .enumerate()
            .filter(|(_, u)| u.slice_id == l && u.active)
            .map(|(n, _)| n)
            .collect();
        for j in 0..count {
            let rb = start + j;
            alloc.slice_rb[[l, rb]] = true;
            if !active.is_empty() {
                alloc.ue_rb[[active[j % active.len()], rb]] = true;
            }
        }
        start += count;
    }
    Ok(alloc)
}

/// `r_t = sum_l P(|Q_l - lambda_l| <= epsilon_l)`.
pub fn compute_reward(qos: &QoSReport) -> f64 {
    qos.per_slice_satisfied_fraction.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::SliceDefaults;
    use proptest::prelude::*;

    fn report(values: Vec<f64>, fractions: Vec<f64>) -> QoSReport {
        QoSReport { per_slice_value: values, per_slice_satisfied_fraction: fractions, per_user_throughput_bps: vec![] }
    }

    fn ues(slices: &[usize]) -> Vec<UEState> {
        slices.iter().enumerate().map(|(i, &l)| UEState::new(i, l, [30.0, 0.0], 5.0)).collect()
    }

    #[test]
    fn zero_qos_encodes_to_densities_only() {
        let slices = SliceDefaults::default().build(10);
        let obs = encode_state(&report(vec![0.0; 3], vec![0.0; 3]), &slices, &[20, 20, 10], &ActionVec::new(vec![0.0; 3]))
            .unwrap();
        assert_eq!(obs.qos_values, vec![0.0; 3]);
        assert_eq!(obs.prev_action, vec![0.0; 3]);
        assert_eq!(obs.ue_density, vec![0.4, 0.4, 0.2]);
        assert_eq!(obs.dim(), 9);
    }

    #[test]
    fn target_qos_normalizes_to_one() {
        let slices = SliceDefaults::default().build(10);
        let lambdas: Vec<f64> = slices.iter().map(|s| s.lambda_target).collect();
        let obs =
            encode_state(&report(lambdas, vec![1.0; 3]), &slices, &[20, 20, 10], &ActionVec::new(vec![0.2; 3])).unwrap();
        assert_eq!(obs.qos_values, vec![1.0, 1.0, 1.0]);
        assert_eq!(obs.prev_action, vec![0.2; 3]);
    }

    #[test]
    fn missing_slice_entry_is_a_shape_error() {
        let slices = SliceDefaults::default().build(10);
        let r = encode_state(&report(vec![0.0; 2], vec![0.0; 2]), &slices, &[1, 1, 1], &ActionVec::new(vec![0.0; 3]));
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn exact_fractions_apportion_exactly() {
        let a = ActionVec::new(vec![0.5, 0.3, 0.2]);
        let alloc = action_to_allocation(&a, 50, &ues(&[0, 1, 2])).unwrap();
        assert_eq!(alloc.slice_counts(), vec![25, 15, 10]);
    }

    #[test]
    fn oversubscribed_action_is_projected() {
        let u = ues(&[0, 0, 1, 2, 2]);
        let alloc = action_to_allocation(&ActionVec::new(vec![1.0; 3]), 50, &u).unwrap();
        let counts = alloc.slice_counts();
        assert!(counts.iter().sum::<usize>() <= 50);
        for &c in &counts {
            assert!((c as f64 - 50.0 / 3.0).abs() < 1.0);
        }
        alloc.validate(&[0, 0, 1, 2, 2]).unwrap();
    }

    #[test]
    fn zero_action_gives_empty_allocation() {
        let u = ues(&[0, 1, 2]);
        let alloc = action_to_allocation(&ActionVec::new(vec![0.0; 3]), 20, &u).unwrap();
        assert!(alloc.slice_rb.iter().all(|&b| !b));
        assert!(alloc.ue_rb.iter().all(|&b| !b));
        let r = compute_reward(&report(vec![0.0; 3], vec![0.0; 3]));
        assert_eq!(r, 0.0);
    }

    #[test]
    fn zero_rbs_is_a_valid_degenerate() {
        let alloc = action_to_allocation(&ActionVec::new(vec![0.4; 3]), 0, &ues(&[0, 1])).unwrap();
        assert_eq!(alloc.total_rbs(), 0);
    }

    #[test]
    fn round_robin_skips_idle_ues() {
        let mut u = ues(&[0, 0, 0]);
        u[1].active = false;
        let alloc = action_to_allocation(&ActionVec::new(vec![0.5, 0.0, 0.0]), 8, &u).unwrap();
        let held: Vec<usize> = (0..3).map(|n| alloc.ue_rb.row(n).iter().filter(|&&b| b).count()).collect();
        assert_eq!(held, vec![2, 0, 2]);
    }

    #[test]
    fn out_of_range_fraction_is_rejected() {
        assert!(action_to_allocation(&ActionVec::new(vec![1.2, 0.0, 0.0]), 10, &ues(&[0])).is_err());
        assert!(action_to_allocation(&ActionVec::new(vec![f64::NAN, 0.0, 0.0]), 10, &ues(&[0])).is_err());
    }

    #[test]
    fn reward_examples() {
        assert_eq!(compute_reward(&report(vec![0.0; 3], vec![1.0; 3])), 3.0);
        assert_eq!(compute_reward(&report(vec![0.0; 3], vec![0.0; 3])), 0.0);
        assert_eq!(compute_reward(&report(vec![0.0; 3], vec![1.0, 0.5, 0.25])), 1.75);
    }

    #[test]
    fn largest_remainder_tie_goes_to_lower_index() {
        assert_eq!(largest_remainder(&[0.25, 0.25, 0.25, 0.25], 2), vec![1, 1, 0, 0]);
        assert_eq!(largest_remainder(&[0.5, 0.5], 3), vec![2, 1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn allocation_is_always_feasible(
            fr in proptest::collection::vec(0.0f64..=1.0, 3),
            k in 0usize..64,
            slices in proptest::collection::vec(0usize..3, 1..12),
            idle in proptest::collection::vec(any::<bool>(), 12),
        ) {
            let mut u = ues(&slices);
            for (ue, &i) in u.iter_mut().zip(&idle) { ue.active = !i; }
            let a = ActionVec::new(fr);
            let alloc = action_to_allocation(&a, k, &u).unwrap();
            prop_assert!(alloc.validate(&slices).is_ok());
            let counts = alloc.slice_counts();
            prop_assert!(counts.iter().sum::<usize>() <= k);
            for (c, q) in counts.iter().zip(a.projected()) {
                prop_assert!((*c as f64 - q * k as f64).abs() < 1.0);
            }
        }

        #[test]
        fn encode_state_is_pure(
            vals in proptest::collection::vec(0.0f64..5e6, 3),
            pops in proptest::collection::vec(1usize..30, 3),
            prev in proptest::collection::vec(0.0f64..1.0, 3),
        ) {
            let slices = SliceDefaults::default().build(pops[1]);
            let r = report(vals, vec![0.5; 3]);
            let a = ActionVec::new(prev);
            let x = encode_state(&r, &slices, &pops, &a).unwrap();
            let y = encode_state(&r, &slices, &pops, &a).unwrap();
            prop_assert_eq!(x.to_vec().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            y.to_vec().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }
}
