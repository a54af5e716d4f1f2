use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::buffer::{JointRow, ReplayBuffer};
use super::config::TrainConfig;
use super::env::{AgentEnv, EnvFactory};
use crate::actor::{ActMode, ActorNet, SacActor};
use crate::critic::{AttentionAudit, Critic, CriticLearner, CriticMode};
use crate::error::{Error, Result};
use crate::nn::Checkpoint;

const INIT_STREAM: u64 = 1 << 40;
const UPDATE_STREAM: u64 = 1 << 41;
const ACT_STREAM: u64 = 1 << 42;

/// Seeded stream `stream` of the run's master generator.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One agent's experience over a batch of episodes.
#[derive(Debug, Clone, Default)]
pub struct Rollout {
    pub steps: Vec<StepRecord>,
    /// Discounted return of every episode.
    pub returns: Vec<f64>,
    /// Per-slice sum of `1 - satisfied fraction` over all steps.
    pub violation_sum: Vec<f64>,
    /// `(slice, bps)` episode-mean throughput of every UE in every episode.
    pub throughput: Vec<(usize, f64)>,
    pub reward_min: f64,
    pub reward_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_obs: Vec<f64>,
}

impl Rollout {
    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }
}

/// `sum_t gamma^t r_t`.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    rewards.iter().rev().fold(0.0, |acc, r| r + gamma * acc)
}

/// Runs `episodes` episodes of `steps` steps of one agent in its own
/// environment.
pub fn run_episodes<R: Rng + ?Sized>(
    env: &mut dyn AgentEnv,
    actor: &ActorNet,
    mode: ActMode,
    episodes: usize,
    steps: usize,
    gamma: f64,
    rng: &mut R,
) -> Result<Rollout> {
    let l = env.n_slices();
    let mut out = Rollout {
        violation_sum: vec![0.0; l],
        reward_min: f64::INFINITY,
        reward_max: f64::NEG_INFINITY,
        ..Default::default()
    };
    for _ in 0..episodes {
        let mut obs = env.reset().to_vec();
        let mut rewards = Vec::with_capacity(steps);
        let mut ue_sum: Vec<f64> = Vec::new();
        let mut ue_slices = Vec::new();
        for _ in 0..steps {
            let (action, _) = actor.act(&obs, mode, rng)?;
            let step = env.step(&action)?;
            let next = step.obs.to_vec();
            for (l, v) in out.violation_sum.iter_mut().enumerate() {
                *v += step.qos.violation(l);
            }
            if ue_sum.is_empty() {
                ue_sum = vec![0.0; step.qos.per_user_throughput_bps.len()];
                ue_slices = step.ue_slices.clone();
            }
            for (s, t) in ue_sum.iter_mut().zip(&step.qos.per_user_throughput_bps) {
                *s += t;
            }
            out.reward_min = out.reward_min.min(step.reward);
            out.reward_max = out.reward_max.max(step.reward);
            rewards.push(step.reward);
            out.steps.push(StepRecord { obs, action: action.slice_fractions, reward: step.reward, next_obs: next.clone() });
            obs = next;
        }
        out.returns.push(discounted_return(&rewards, gamma));
        out.throughput.extend(ue_slices.iter().zip(&ue_sum).map(|(&l, &s)| (l, s / steps as f64)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationMetrics {
    pub iteration: usize,
    /// Mean discounted return of each agent's collection episodes.
    pub per_agent_return: Vec<f64>,
    pub mean_return: f64,
    /// Mean `1 - satisfied fraction` per slice over all agents' steps.
    pub per_slice_violation: Vec<f64>,
    pub throughput: Vec<(usize, f64)>,
    pub updated: bool,
    pub critic_loss: Option<f64>,
    pub policy_loss: Option<f64>,
}

/// Optimizer step counts and the outcome of the ordering check.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpdateLog {
    pub rounds: u64,
    pub attention_steps: u64,
    pub value_steps: u64,
    pub actor_steps: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub mode: CriticMode,
    pub iterations: Vec<IterationMetrics>,
    pub converged_at: Option<usize>,
    pub updates: UpdateLog,
    pub attention: AttentionAudit,
    pub reward_min: f64,
    pub reward_max: f64,
    /// Environment steps taken, each with a validated allocation.
    pub env_steps: u64,
    pub warmup_skips: usize,
}

impl TrainReport {
    pub fn mean_returns(&self) -> Vec<f64> {
        self.iterations.iter().map(|m| m.mean_return).collect()
    }
}

#[derive(Debug)]
pub struct Trained {
    pub actors: Vec<SacActor>,
    pub critic: CriticLearner,
    pub report: TrainReport,
}

impl Trained {
    pub fn actor_nets(&self) -> Vec<ActorNet> {
        self.actors.iter().map(|a| a.net.clone()).collect()
    }

    /// Writes `actor_<i>.ckpt` per agent and `critic.ckpt` (online and
    /// target copies) into `dir`.
    pub fn save_checkpoints(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut paths = Vec::new();
        for a in &self.actors {
            let p = dir.join(format!("actor_{}.ckpt", a.net.agent_id));
            Checkpoint::from_module(&a.net).save(&p)?;
            paths.push(p);
        }
        let mut ck = Checkpoint::default();
        ck.extend(&self.critic.online, "online/");
        ck.extend(&self.critic.target, "target/");
        let p = dir.join("critic.ckpt");
        ck.save(&p)?;
        paths.push(p);
        Ok(paths)
    }
}

struct Worker {
    env: Box<dyn AgentEnv>,
    rng: ChaCha8Rng,
}

fn window_mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Relative change of the window-mean return between the last two windows
/// falls below the threshold. Never true before two full windows.
pub fn has_converged(returns: &[f64], window: usize, threshold: f64) -> bool {
    if window == 0 || returns.len() < 2 * window {
        return false;
    }
    let n = returns.len();
    let prev = window_mean(&returns[n - 2 * window..n - window]);
    let last = window_mean(&returns[n - window..]);
    (last - prev).abs() / prev.abs().max(1e-12) < threshold
}

/// Distributed actors with a centralized critic: every iteration each agent
/// collects `n_evaluations` episodes in its own DU, the joint steps go to the
/// replay buffer, then the critic (attention group, then value group) and
/// each actor take `updates_per_iteration` gradient rounds.
pub fn run_training(cfg: &TrainConfig, factory: &dyn EnvFactory, mode: CriticMode) -> Result<Trained> {
    cfg.validate()?;
    let n = cfg.n_actors;
    let mut workers = (0..n)
        .map(|i| Ok(Worker { env: factory.make(i, 0)?, rng: stream_rng(cfg.seed, ACT_STREAM | i as u64) }))
        .collect::<Result<Vec<_>>>()?;
    let l = workers[0].env.n_slices();
    if workers.iter().any(|w| w.env.n_slices() != l) {
        return Err(Error::Shape("agents disagree on the slice count".into()));
    }
    let obs_dim = 3 * l;

    let mut init = stream_rng(cfg.seed, INIT_STREAM);
    let actor_cfg = cfg.actor_config();
    let mut actors = (0..n)
        .map(|i| Ok(SacActor::new(ActorNet::new(i, obs_dim, l, &actor_cfg, &mut init)?, &actor_cfg)))
        .collect::<Result<Vec<_>>>()?;
    let critic_net = Critic::new(mode, n, obs_dim, l, &cfg.attention, &cfg.baseline, &mut init)?;
    let mut critic = CriticLearner::new(critic_net, cfg.lr);
    let mut update_rng = stream_rng(cfg.seed, UPDATE_STREAM);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);

    let mut report = TrainReport {
        mode,
        iterations: Vec::with_capacity(cfg.n_iterations),
        converged_at: None,
        updates: UpdateLog { actor_steps: vec![0; n], ..Default::default() },
        attention: AttentionAudit::default(),
        reward_min: f64::INFINITY,
        reward_max: f64::NEG_INFINITY,
        env_steps: 0,
        warmup_skips: 0,
    };

    for iteration in 0..cfg.n_iterations {
        let collect = |(w, a): (&mut Worker, &SacActor)| {
            run_episodes(
                w.env.as_mut(),
                &a.net,
                ActMode::Stochastic,
                cfg.n_evaluations,
                cfg.episode_steps,
                cfg.gamma,
                &mut w.rng,
            )
        };
        let rollouts: Vec<Rollout> = if cfg.parallel {
            workers.par_iter_mut().zip(actors.par_iter()).map(collect).collect::<Result<_>>()?
        } else {
            workers.iter_mut().zip(actors.iter()).map(collect).collect::<Result<_>>()?
        };

        let rows = rollouts[0].steps.len();
        for k in 0..rows {
            buffer.push(JointRow {
                obs: rollouts.iter().map(|r| r.steps[k].obs.clone()).collect(),
                actions: rollouts.iter().map(|r| r.steps[k].action.clone()).collect(),
                rewards: rollouts.iter().map(|r| r.steps[k].reward).collect(),
                next_obs: rollouts.iter().map(|r| r.steps[k].next_obs.clone()).collect(),
            });
        }
        report.env_steps += (rows * n) as u64;

        let mut critic_loss = None;
        let mut policy_loss = None;
        let updated = buffer.len() >= cfg.batch_size;
        if updated {
            let mut c_sum = 0.0;
            let mut p_sum = 0.0;
            for _ in 0..cfg.updates_per_iteration {
                let batch = buffer.sample(cfg.batch_size, &mut update_rng)?;
                let mut targets = cfg.targets();
                if cfg.actor.auto_temperature {
                    targets.beta_temp = actors.iter().map(|a| a.beta()).sum::<f64>() / n as f64;
                }
                let before = critic.update_counts();
                let c = critic.update(&batch, &actors, &targets, &mut update_rng)?;
                let after = critic.update_counts();
                let expect_attention = u64::from(mode == CriticMode::Attention);
                if after.0 != before.0 + expect_attention || after.1 != before.1 + 1 {
                    return Err(Error::Usage("critic update skipped a parameter group".into()));
                }
                for (i, actor) in actors.iter_mut().enumerate() {
                    let steps = actor.adam.steps();
                    let p = actor.policy_update(&batch.obs, &batch.actions, &critic, &mut update_rng)?;
                    if actor.adam.steps() != steps + 1 || critic.update_counts() != after {
                        return Err(Error::Usage("actor update out of order".into()));
                    }
                    if !p.loss.is_finite() {
                        return Err(Error::PoisonedUpdate(format!("actor{i} loss")));
                    }
                    p_sum += p.loss;
                    report.updates.actor_steps[i] += 1;
                }
                if !c.loss.is_finite() {
                    return Err(Error::PoisonedUpdate("critic loss".into()));
                }
                c_sum += c.loss;
                report.updates.rounds += 1;
                report.updates.attention_steps += after.0 - before.0;
                report.updates.value_steps += after.1 - before.1;
            }
            let u = cfg.updates_per_iteration.max(1) as f64;
            critic_loss = Some(c_sum / u);
            policy_loss = Some(p_sum / (u * n as f64));
        } else {
            report.warmup_skips += 1;
        }

        let per_agent_return: Vec<f64> = rollouts.iter().map(|r| window_mean(&r.returns)).collect();
        let total_steps = (rows * n) as f64;
        let per_slice_violation = (0..l)
            .map(|s| rollouts.iter().map(|r| r.violation_sum[s]).sum::<f64>() / total_steps)
            .collect();
        for r in &rollouts {
            report.reward_min = report.reward_min.min(r.reward_min);
            report.reward_max = report.reward_max.max(r.reward_max);
        }
        report.iterations.push(IterationMetrics {
            iteration,
            mean_return: window_mean(&per_agent_return),
            per_agent_return,
            per_slice_violation,
            throughput: rollouts.into_iter().flat_map(|r| r.throughput).collect(),
            updated,
            critic_loss,
            policy_loss,
        });

        if cfg.early_stop && has_converged(&report.mean_returns(), cfg.convergence_window, cfg.convergence_threshold) {
            report.converged_at = Some(iteration);
            break;
        }
    }
    report.attention = critic.audit();
    Ok(Trained { actors, critic, report })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// `[agent][episode]` discounted returns.
    pub returns: Vec<Vec<f64>>,
    /// `[agent]` raw per-step rewards, episodes back to back.
    pub rewards: Vec<Vec<f64>>,
    pub per_slice_violation: Vec<f64>,
    pub throughput: Vec<(usize, f64)>,
}

impl EvalReport {
    pub fn mean_return(&self) -> f64 {
        let all: Vec<f64> = self.returns.iter().flatten().copied().collect();
        if all.is_empty() {
            0.0
        } else {
            window_mean(&all)
        }
    }
}

/// Deterministic-mode episodes of every actor in fresh environments of the
/// given factory variant. Touches no training state.
pub fn evaluate_policy(
    actors: &[ActorNet],
    factory: &dyn EnvFactory,
    variant: u64,
    episodes: usize,
    episode_steps: usize,
    gamma: f64,
) -> Result<EvalReport> {
    let mut report = EvalReport { returns: Vec::new(), rewards: Vec::new(), per_slice_violation: Vec::new(), throughput: Vec::new() };
    let mut steps = 0usize;
    for (i, actor) in actors.iter().enumerate() {
        let mut env = factory.make(i, variant)?;
        // deterministic acting draws nothing from this generator
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = run_episodes(env.as_mut(), actor, ActMode::Deterministic, episodes, episode_steps, gamma, &mut rng)?;
        if report.per_slice_violation.is_empty() {
            report.per_slice_violation = vec![0.0; r.violation_sum.len()];
        }
        for (acc, v) in report.per_slice_violation.iter_mut().zip(&r.violation_sum) {
            *acc += v;
        }
        steps += r.steps.len();
        report.rewards.push(r.rewards());
        report.returns.push(r.returns);
        report.throughput.extend(r.throughput);
    }
    if steps > 0 {
        report.per_slice_violation.iter_mut().for_each(|v| *v /= steps as f64);
    }
    Ok(report)
}
