use ndarray::Array2;

use super::channel::{ChannelState, UEState};
use super::config::RadioModel;
use crate::error::{Constraint, Error, Result};

/// Slice-level (`slice_rb`, L x K) and UE-level (`ue_rb`, N x K) binary RB
/// indicators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub slice_rb: Array2<bool>,
    pub ue_rb: Array2<bool>,
}

impl Allocation {
    pub fn empty(n_slices: usize, n_ues: usize, total_rbs: usize) -> Self {
        Self {
            slice_rb: Array2::from_elem((n_slices, total_rbs), false),
            ue_rb: Array2::from_elem((n_ues, total_rbs), false),
        }
    }

    pub fn total_rbs(&self) -> usize {
        self.slice_rb.ncols()
    }

    /// Number of RBs owned by each slice.
    pub fn slice_counts(&self) -> Vec<usize> {
        self.slice_rb.rows().into_iter().map(|r| r.iter().filter(|&&b| b).count()).collect()
    }

    /// Checks per-RB slice exclusivity, the total grant budget, and that
    /// every UE only holds blocks owned by its own slice.
    pub fn validate(&self, ue_slices: &[usize]) -> Result<()> {
        let k = self.slice_rb.ncols();
        let n_slices = self.slice_rb.nrows();
        if self.ue_rb.ncols() != k {
            return Err(Error::Shape(format!(
                "ue_rb has {} RBs, slice_rb has {k}",
                self.ue_rb.ncols()
            )));
        }
        if self.ue_rb.nrows() != ue_slices.len() {
            return Err(Error::Shape(format!(
                "ue_rb has {} rows for {} UEs",
                self.ue_rb.nrows(),
                ue_slices.len()
            )));
        }
        if let Some(&bad) = ue_slices.iter().find(|&&l| l >= n_slices) {
            return Err(Error::Shape(format!("UE slice index {bad} >= {n_slices} slices")));
        }
        for rb in 0..k {
            let owners = self.slice_rb.column(rb).iter().filter(|&&b| b).count();
            if owners > 1 {
                return Err(Error::ConstraintViolation(Constraint::SliceOverlap { rb }));
            }
        }
        let mut used = 0usize;
        for (ue, &slice) in ue_slices.iter().enumerate() {
            for rb in 0..k {
                if self.ue_rb[[ue, rb]] {
                    if !self.slice_rb[[slice, rb]] {
                        return Err(Error::ConstraintViolation(Constraint::ForeignBlock { ue, rb }));
                    }
                    used += 1;
                }
            }
        }
        if used > k {
            return Err(Error::ConstraintViolation(Constraint::TotalBudget { used, total: k }));
        }
        Ok(())
    }
}

/// Instantaneous per-UE rates (bps) for one slot, without validating the
/// allocation. Each granted (UE, RB) pair contributes
/// `B * log2(1 + p_u d^-eta |h|^2 / (I + sigma^2))`.
pub(crate) fn ue_rates_unchecked(
    model: &RadioModel,
    ch: &ChannelState,
    alloc: &Allocation,
    ues: &[UEState],
) -> Vec<f64> {
    let k = alloc.total_rbs();
    ues.iter()
        .enumerate()
        .map(|(n, ue)| {
            let rx = model.tx_power_mw * ue.distance_m.powf(-model.path_loss_exponent);
            let mut bits_per_hz = 0.0;
            for rb in 0..k {
                if alloc.ue_rb[[n, rb]] && alloc.slice_rb[[ue.slice_id, rb]] {
                    let sinr = rx * ch.gains[[n, rb]] / (ch.interference_mw[[n, rb]] + model.noise_mw);
                    bits_per_hz += (1.0 + sinr).log2();
                }
            }
            model.bandwidth_hz * bits_per_hz
        })
        .collect()
}

fn check_dims(ch: &ChannelState, alloc: &Allocation, ues: &[UEState]) -> Result<()> {
    if ch.gains.dim() != (ues.len(), alloc.total_rbs())
        || ch.interference_mw.dim() != ch.gains.dim()
    {
        return Err(Error::Shape(format!(
            "channel state {:?} does not match {} UEs x {} RBs",
            ch.gains.dim(),
            ues.len(),
            alloc.total_rbs()
        )));
    }
    Ok(())
}

/// Per-UE rates for one slot after validating the allocation.
pub fn ue_rates(
    model: &RadioModel,
    ch: &ChannelState,
    alloc: &Allocation,
    ues: &[UEState],
) -> Result<Vec<f64>> {
    check_dims(ch, alloc, ues)?;
    let slices: Vec<usize> = ues.iter().map(|u| u.slice_id).collect();
    alloc.validate(&slices)?;
    Ok(ue_rates_unchecked(model, ch, alloc, ues))
}

/// Aggregate rate of one slice in one slot, together with the rate of every
/// UE (UEs of other slices report zero).
pub fn slice_rate(
    model: &RadioModel,
    ch: &ChannelState,
    alloc: &Allocation,
    ues: &[UEState],
    slice: usize,
) -> Result<(f64, Vec<f64>)> {
    if slice >= alloc.slice_rb.nrows() {
        return Err(Error::Shape(format!("slice {slice} out of range")));
    }
    let rates = ue_rates(model, ch, alloc, ues)?;
    let per_ue: Vec<f64> = rates
        .iter()
        .zip(ues)
        .map(|(&r, ue)| if ue.slice_id == slice { r } else { 0.0 })
        .collect();
    Ok((per_ue.iter().sum(), per_ue))
}

/// Step-level slice rates: the slot rates averaged over a window of channel
/// realizations, standing in for the long-run limit.
pub fn windowed_slice_rate(
    model: &RadioModel,
    window: &[ChannelState],
    alloc: &Allocation,
    ues: &[UEState],
    slice: usize,
) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::Empty("channel window".into()));
    }
    let mut acc = 0.0;
    for ch in window {
        acc += slice_rate(model, ch, alloc, ues, slice)?.0;
    }
    Ok(acc / window.len() as f64)
}
