use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical-layer constants for one distributed unit.
///
/// Powers are given in dBm here and converted to milliwatts once, in
/// [`RadioConfig::resolve`]; everything downstream works in linear units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub rb_bandwidth_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub total_rbs: usize,
    pub tx_power_per_rb_dbm: f64,
    pub noise_variance_dbm: f64,
    pub path_loss_exponent: f64,
    pub cell_radius_m: f64,
    /// Distance used in the path-loss term never drops below this.
    pub min_distance_m: f64,
    pub neighbor_count: usize,
    pub neighbor_activity_prob: f64,
    pub slots_per_step: usize,
    pub slot_duration_s: f64,
    pub ue_speed_mps: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            rb_bandwidth_hz: 200e3,
            subcarrier_spacing_hz: 15e3,
            total_rbs: 50,
            tx_power_per_rb_dbm: 56.0,
            noise_variance_dbm: -173.0,
            path_loss_exponent: 3.0,
            cell_radius_m: 250.0,
            min_distance_m: 5.0,
            neighbor_count: 2,
            neighbor_activity_prob: 0.5,
            slots_per_step: 20,
            slot_duration_s: 1e-3,
            ue_speed_mps: 1.0,
        }
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("radio: {msg}")));
        if self.total_rbs == 0 {
            return bad("total_rbs must be > 0");
        }
        if !(self.rb_bandwidth_hz > 0.0) || !self.rb_bandwidth_hz.is_finite() {
            return bad("rb_bandwidth_hz must be > 0");
        }
        if !(0.0..=1.0).contains(&self.neighbor_activity_prob) {
            return bad("neighbor_activity_prob must lie in [0, 1]");
        }
        if !(self.path_loss_exponent >= 2.0) {
            return bad("path_loss_exponent must be >= 2");
        }
        if self.slots_per_step == 0 {
            return bad("slots_per_step must be >= 1");
        }
        if !(self.cell_radius_m > 0.0) || !(self.min_distance_m > 0.0) {
            return bad("cell_radius_m and min_distance_m must be > 0");
        }
        if self.min_distance_m > self.cell_radius_m {
            return bad("min_distance_m must not exceed cell_radius_m");
        }
        if !(self.slot_duration_s > 0.0) {
            return bad("slot_duration_s must be > 0");
        }
        if !(self.ue_speed_mps >= 0.0) || !self.ue_speed_mps.is_finite() {
            return bad("ue_speed_mps must be finite and >= 0");
        }
        if !self.tx_power_per_rb_dbm.is_finite() || !self.noise_variance_dbm.is_finite() {
            return bad("powers must be finite");
        }
        Ok(())
    }

    /// Validates and converts to the linear-unit model used by the simulator.
    pub fn resolve(&self) -> Result<RadioModel> {
        self.validate()?;
        let ring = 2.0 * self.cell_radius_m;
        let neighbors = (0..self.neighbor_count)
            .map(|j| {
                let angle = std::f64::consts::TAU * j as f64 / self.neighbor_count as f64;
                [ring * angle.cos(), ring * angle.sin()]
            })
            .collect();
        Ok(RadioModel {
            bandwidth_hz: self.rb_bandwidth_hz,
            total_rbs: self.total_rbs,
            tx_power_mw: dbm_to_mw(self.tx_power_per_rb_dbm),
            noise_mw: dbm_to_mw(self.noise_variance_dbm),
            path_loss_exponent: self.path_loss_exponent,
            cell_radius_m: self.cell_radius_m,
            min_distance_m: self.min_distance_m,
            neighbor_positions: neighbors,
            neighbor_activity_prob: self.neighbor_activity_prob,
            slots_per_step: self.slots_per_step,
            slot_duration_s: self.slot_duration_s,
            ue_speed_mps: self.ue_speed_mps,
        })
    }
}

/// Resolved radio parameters in linear units plus the cell geometry.
///
/// The serving O-RU sits at the origin; interfering O-RUs sit on a ring of
/// radius `2 * cell_radius_m`, evenly spaced in angle.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioModel {
    pub bandwidth_hz: f64,
    pub total_rbs: usize,
    pub tx_power_mw: f64,
    pub noise_mw: f64,
    pub path_loss_exponent: f64,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub neighbor_positions: Vec<[f64; 2]>,
    pub neighbor_activity_prob: f64,
    pub slots_per_step: usize,
    pub slot_duration_s: f64,
    pub ue_speed_mps: f64,
}

impl RadioModel {
    pub fn window_duration_s(&self) -> f64 {
        self.slots_per_step as f64 * self.slot_duration_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QosKind {
    Throughput,
    ConnectionDensity,
    MaxDelay,
}

/// QoS contract of one slice plus the traffic model that loads it.
///
/// `lambda_target` and `epsilon_margin` are in the slice's own units: bps for
/// throughput slices, device count for connection-density slices, seconds for
/// delay slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSpec {
    pub slice_id: usize,
    pub name: String,
    pub qos_kind: QosKind,
    pub lambda_target: f64,
    pub epsilon_margin: f64,
    /// Mean packet size; only meaningful for delay slices.
    #[serde(default)]
    pub packet_mean_bits: f64,
    /// Packet arrival rate per active UE (delay slices).
    #[serde(default)]
    pub packet_rate_hz: f64,
    /// Poisson rate at which an idle UE starts a session.
    pub session_arrival_hz: f64,
    /// Mean session holding time; an active UE goes idle at rate `1 / mean`.
    pub mean_session_s: f64,
    /// Minimum per-UE rate for a device to count as connected (density slices).
    #[serde(default)]
    pub min_rate_bps: f64,
}

impl SliceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("slice {}: {msg}", self.name)));
        if !(self.epsilon_margin > 0.0) {
            return bad("epsilon_margin must be > 0".into());
        }
        if !(self.lambda_target > 0.0) {
            return bad("lambda_target must be > 0".into());
        }
        if self.qos_kind == QosKind::MaxDelay {
            if !(self.packet_mean_bits > 0.0) {
                return bad("packet_mean_bits must be > 0 for a delay slice".into());
            }
            if !(self.packet_rate_hz >= 0.0) {
                return bad("packet_rate_hz must be >= 0".into());
            }
        }
        if !(self.session_arrival_hz >= 0.0) || !(self.mean_session_s > 0.0) {
            return bad("session_arrival_hz must be >= 0 and mean_session_s > 0".into());
        }
        if !(self.min_rate_bps >= 0.0) {
            return bad("min_rate_bps must be >= 0".into());
        }
        Ok(())
    }

    /// Long-run fraction of time a UE of this slice holds an active session.
    pub fn stationary_activity(&self) -> f64 {
        let off = 1.0 / self.mean_session_s;
        self.session_arrival_hz / (self.session_arrival_hz + off)
    }
}

/// Targets for the three default slices, before they are scaled to a DU's
/// population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SliceDefaults {
    pub embb_lambda_bps: f64,
    pub embb_epsilon_bps: f64,
    /// Connection-density target as a fraction of the slice population.
    pub mtc_lambda_fraction: f64,
    pub mtc_epsilon_fraction: f64,
    /// Lower bound on the MTC margin in devices, so that the satisfaction
    /// band always contains an integer count.
    pub mtc_epsilon_floor: f64,
    pub mtc_min_rate_bps: f64,
    pub urllc_lambda_s: f64,
    pub urllc_epsilon_s: f64,
    pub urllc_packet_mean_bits: f64,
    pub urllc_packet_rate_hz: f64,
    pub embb_session_arrival_hz: f64,
    pub mtc_session_arrival_hz: f64,
    pub urllc_session_arrival_hz: f64,
    pub mean_session_s: f64,
}

impl Default for SliceDefaults {
    fn default() -> Self {
        Self {
            embb_lambda_bps: 2e6,
            embb_epsilon_bps: 0.5e6,
            mtc_lambda_fraction: 0.8,
            mtc_epsilon_fraction: 0.1,
            mtc_epsilon_floor: 0.5,
            mtc_min_rate_bps: 200e3,
            urllc_lambda_s: 10e-3,
            urllc_epsilon_s: 5e-3,
            urllc_packet_mean_bits: 10e3,
            urllc_packet_rate_hz: 100.0,
            embb_session_arrival_hz: 18.0,
            mtc_session_arrival_hz: 8.0,
            urllc_session_arrival_hz: 8.0,
            mean_session_s: 0.5,
        }
    }
}

impl SliceDefaults {
    /// eMBB, MTC and URLLC slices (ids 0, 1, 2) for a DU whose MTC slice
    /// holds `mtc_population` UEs.
    pub fn build(&self, mtc_population: usize) -> Vec<SliceSpec> {
        let n_mtc = mtc_population.max(1) as f64;
        vec![
            SliceSpec {
                slice_id: 0,
                name: "embb".into(),
                qos_kind: QosKind::Throughput,
                lambda_target: self.embb_lambda_bps,
                epsilon_margin: self.embb_epsilon_bps,
                packet_mean_bits: 0.0,
                packet_rate_hz: 0.0,
                session_arrival_hz: self.embb_session_arrival_hz,
                mean_session_s: self.mean_session_s,
                min_rate_bps: 0.0,
            },
            SliceSpec {
                slice_id: 1,
                name: "mtc".into(),
                qos_kind: QosKind::ConnectionDensity,
                lambda_target: self.mtc_lambda_fraction * n_mtc,
                epsilon_margin: (self.mtc_epsilon_fraction * n_mtc).max(self.mtc_epsilon_floor),
                packet_mean_bits: 0.0,
                packet_rate_hz: 0.0,
                session_arrival_hz: self.mtc_session_arrival_hz,
                mean_session_s: self.mean_session_s,
                min_rate_bps: self.mtc_min_rate_bps,
            },
            SliceSpec {
                slice_id: 2,
                name: "urllc".into(),
                qos_kind: QosKind::MaxDelay,
                lambda_target: self.urllc_lambda_s,
                epsilon_margin: self.urllc_epsilon_s,
                packet_mean_bits: self.urllc_packet_mean_bits,
                packet_rate_hz: self.urllc_packet_rate_hz,
                session_arrival_hz: self.urllc_session_arrival_hz,
                mean_session_s: self.mean_session_s,
                min_rate_bps: 0.0,
            },
        ]
    }
}
