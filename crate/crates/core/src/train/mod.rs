//! Distributed training loop, replay buffer and policy evaluation.

pub mod buffer;
pub mod config;
pub mod env;
pub mod harness;

pub use buffer::{JointRow, ReplayBuffer};
pub use config::TrainConfig;
pub use env::{AgentEnv, DuEnvFactory, EnvFactory, EnvStep, SlicingEnv};
pub use harness::{
    discounted_return, evaluate_policy, has_converged, run_episodes, run_training, stream_rng, EvalReport,
    IterationMetrics, Rollout, StepRecord, TrainReport, Trained, UpdateLog,
};
