use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::mdp::{action_to_allocation, compute_reward, encode_state, ActionVec, Observation};
use crate::radio::{DuEnvironment, EnvConfig, QoSReport, N_SLICES};

/// What an agent sees after one step.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub obs: Observation,
    pub reward: f64,
    pub qos: QoSReport,
    /// Slice of every UE, aligned with the report's per-user throughput.
    pub ue_slices: Vec<usize>,
}

/// The slicing MDP as seen by one agent.
pub trait AgentEnv: Send {
    fn n_slices(&self) -> usize;
    fn reset(&mut self) -> Observation;
    fn step(&mut self, action: &ActionVec) -> Result<EnvStep>;
}

/// Builds one environment per agent. `variant` 0 is the training stream;
/// other variants give independent dynamics over the same DU layout.
pub trait EnvFactory: Sync {
    fn make(&self, agent: usize, variant: u64) -> Result<Box<dyn AgentEnv>>;
}

/// A DU cell behind the slice-level scheduler.
#[derive(Debug, Clone)]
pub struct SlicingEnv {
    pub du: DuEnvironment,
}

impl SlicingEnv {
    pub fn new(du: DuEnvironment) -> Self {
        Self { du }
    }

    fn initial_observation(&self) -> Observation {
        let l = self.du.slices().len();
        let total: usize = self.du.populations().iter().sum();
        let mut obs = Observation::zeros(l);
        obs.ue_density = self.du.populations().iter().map(|&n| n as f64 / total.max(1) as f64).collect();
        obs
    }
}

impl AgentEnv for SlicingEnv {
    fn n_slices(&self) -> usize {
        self.du.slices().len()
    }

    fn reset(&mut self) -> Observation {
        self.du.reset();
        self.initial_observation()
    }

    fn step(&mut self, action: &ActionVec) -> Result<EnvStep> {
        let alloc = action_to_allocation(action, self.du.model().total_rbs, self.du.ues())?;
        let ue_slices = self.du.ue_slices();
        let out = self.du.step(&alloc)?;
        let obs = encode_state(&out.qos, self.du.slices(), self.du.populations(), action)?;
        Ok(EnvStep { obs, reward: compute_reward(&out.qos), qos: out.qos, ue_slices })
    }
}

/// DU `i` of a run seeded with `seed`.
#[derive(Debug, Clone)]
pub struct DuEnvFactory {
    pub cfg: EnvConfig,
    pub seed: u64,
}

impl EnvFactory for DuEnvFactory {
    fn make(&self, agent: usize, variant: u64) -> Result<Box<dyn AgentEnv>> {
        let base = DuEnvironment::for_du(&self.cfg, self.seed, agent as u64)?;
        if variant == 0 {
            return Ok(Box::new(SlicingEnv::new(base)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((variant << 32) | agent as u64);
        let du = DuEnvironment::with_rng(base.model().clone(), base.slices().to_vec(), base.populations().to_vec(), rng)?;
        Ok(Box::new(SlicingEnv::new(du)))
    }
}

impl DuEnvFactory {
    pub fn n_slices(&self) -> usize {
        N_SLICES
    }
}
