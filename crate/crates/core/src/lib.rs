//! Desk-scale O-RAN network-slicing lab.
//!
//! Distributed soft actor-critic agents, one per O-DU, split each DU's
//! resource blocks between eMBB, MTC and URLLC slices. A global critic at the
//! RIC scores joint observations either through per-agent attention over the
//! other agents' embeddings or, as a baseline, through one MLP over the
//! concatenated joint input.
//!
//! * [`radio`]: OFDMA downlink cell with fading, interference, mobility and traffic
//! * [`mdp`]: observations, the MAC scheduler and the SLA reward
//! * [`nn`]: dense layers, reverse passes, Adam, Polyak tracking, checkpoints
//! * [`actor`]: per-DU squashed-Gaussian policies
//! * [`critic`]: attention critic and the joint-MLP baseline
//! * [`train`]: replay buffer and the training loop
//! * [`experiment`]: configuration files, CSV artifacts and comparisons
//!
//! The `examples/` directory has one runnable program per capability.

pub mod actor;
pub mod critic;
pub mod error;
pub mod experiment;
pub mod mdp;
pub mod nn;
pub mod radio;
pub mod train;

pub use error::{Error, Result};
