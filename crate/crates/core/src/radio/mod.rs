//! Downlink OFDMA slice environment for a single distributed unit.
//!
//! [`channel`] draws Rayleigh fading and neighbor interference, [`rate`]
//! turns an [`Allocation`] into per-UE and per-slice rates, [`qos`] scores a
//! window of slots against each slice's contract, and [`env`] ties these
//! together with mobility and traffic.

pub mod channel;
pub mod config;
pub mod env;
pub mod qos;
pub mod rate;

pub use channel::{sample_channel, ChannelState, UEState};
pub use config::{dbm_to_mw, QosKind, RadioConfig, RadioModel, SliceDefaults, SliceSpec};
pub use env::{partition_population, DuEnvironment, EnvConfig, StepOutcome, N_SLICES};
pub use qos::{packet_delay, qos_metrics, Packet, QoSReport, SlotSample};
pub use rate::{slice_rate, ue_rates, windowed_slice_rate, Allocation};
