//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. The desk-scale training runs are shared by criteria 3 to 7.
//!
//! `ACCEPTANCE_SEEDS` overrides the number of desk seeds (default 5).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use ndarray::{Array1, Array2};
use oran_slicing::actor::{ActMode, ActorConfig, ActorNet, SacActor, SyntheticCritic};
use oran_slicing::critic::{
    AttentionAudit, AttentionConfig, AttentionCritic, BaselineConfig, BaselineCritic, Critic, CriticLearner,
    CriticMode, CriticTargetConfig, JointBatch,
};
use oran_slicing::experiment::{compare_from_csvs, run_experiment, ExperimentConfig, RunOutcome};
use oran_slicing::mdp::{action_to_allocation, compute_reward, ActionVec};
use oran_slicing::nn::gradcheck::{param_grad_errors, relative_error, FD_STEP};
use oran_slicing::nn::standard_normal;
use oran_slicing::radio::{
    qos_metrics, slice_rate, Allocation, ChannelState, Packet, RadioConfig, SliceDefaults, SlotSample, UEState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), String>;

fn desk() -> ExperimentConfig {
    ExperimentConfig::from_toml(include_str!("../configs/desk.toml")).expect("desk config parses")
}

// ---------------------------------------------------------------- 1

fn dbm_to_mw_oracle(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Direct triple sum over (n, k) for one slice.
fn rate_oracle(cfg: &RadioConfig, ch: &ChannelState, alloc: &Allocation, ues: &[UEState], slice: usize) -> f64 {
    let p = dbm_to_mw_oracle(cfg.tx_power_per_rb_dbm);
    let sigma2 = dbm_to_mw_oracle(cfg.noise_variance_dbm);
    let mut total = 0.0;
    for (n, ue) in ues.iter().enumerate() {
        for k in 0..alloc.total_rbs() {
            let e = alloc.ue_rb[[n, k]] as u8 as f64;
            let b = (alloc.slice_rb[[slice, k]] && ue.slice_id == slice) as u8 as f64;
            let sinr = p * ue.distance_m.powf(-cfg.path_loss_exponent) * ch.gains[[n, k]]
                / (ch.interference_mw[[n, k]] + sigma2);
            total += e * b * (1.0 + sinr).log2();
        }
    }
    cfg.rb_bandwidth_hz * total
}

fn criterion_1() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut nonzero = 0;
    for _ in 0..1000 {
        let mut cfg = RadioConfig::default();
        cfg.total_rbs = rng.random_range(1..=8);
        cfg.path_loss_exponent = rng.random_range(2.0..4.0);
        let model = cfg.resolve().map_err(|e| e.to_string())?;
        let n_slices = 3;
        let n_ues = rng.random_range(1..=5);
        let ues: Vec<UEState> = (0..n_ues)
            .map(|n| {
                let r = rng.random_range(10.0..cfg.cell_radius_m);
                let th = rng.random_range(0.0..std::f64::consts::TAU);
                UEState::new(n, rng.random_range(0..n_slices), [r * th.cos(), r * th.sin()], cfg.min_distance_m)
            })
            .collect();
        let k = cfg.total_rbs;
        let ch = ChannelState {
            gains: Array2::from_shape_fn((n_ues, k), |_| rng.random_range(0.0..3.0)),
            interference_mw: Array2::from_shape_fn((n_ues, k), |_| rng.random_range(0.0..1e-9)),
        };
        let mut alloc = Allocation::empty(n_slices, n_ues, k);
        for rb in 0..k {
            let owner = rng.random_range(0..=n_slices);
            if owner == n_slices {
                continue;
            }
            alloc.slice_rb[[owner, rb]] = true;
            let members: Vec<usize> = (0..n_ues).filter(|&n| ues[n].slice_id == owner).collect();
            if !members.is_empty() && rng.random_bool(0.8) {
                alloc.ue_rb[[members[rng.random_range(0..members.len())], rb]] = true;
            }
        }
        for l in 0..n_slices {
            let (got, per_ue) = slice_rate(&model, &ch, &alloc, &ues, l).map_err(|e| e.to_string())?;
            let want = rate_oracle(&cfg, &ch, &alloc, &ues, l);
            let err = if want == 0.0 { got.abs() } else { (got - want).abs() / want.abs() };
            if want > 0.0 {
                nonzero += 1;
            }
            worst = worst.max(err).max((per_ue.iter().sum::<f64>() - got).abs() / got.abs().max(1.0));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-12 && secs < 5.0 && nonzero > 500,
        format!("1000 instances ({nonzero} nonzero slice rates), worst relative error {worst:.1e}, {secs:.2}s"),
    ))
}

// ---------------------------------------------------------------- 2

fn joint(n: usize, rows: usize, rng: &mut ChaCha8Rng) -> (Vec<Array2<f64>>, Vec<Array2<f64>>) {
    let obs = (0..n).map(|_| Array2::from_shape_fn((rows, 9), |_| rng.random_range(-1.0..1.0))).collect();
    let act = (0..n).map(|_| Array2::from_shape_fn((rows, 3), |_| rng.random_range(0.0..1.0))).collect();
    (obs, act)
}

#[derive(Default)]
struct GroupErr {
    draws: usize,
    worst: f64,
}

impl GroupErr {
    fn add(&mut self, errs: &[(String, f64)], pred: impl Fn(&str) -> bool) {
        let hit: Vec<f64> = errs.iter().filter(|(n, _)| pred(n)).map(|(_, e)| *e).collect();
        if !hit.is_empty() {
            self.draws += 1;
            self.worst = hit.into_iter().fold(self.worst, f64::max);
        }
    }
}

fn action_grad_error(
    forward: &dyn Fn(&[Array2<f64>]) -> Array2<f64>,
    d_in: &[Array2<f64>],
    act: &[Array2<f64>],
    w: &Array2<f64>,
) -> f64 {
    let mut an = Vec::new();
    let mut nu = Vec::new();
    for agent in 0..act.len() {
        for r in 0..act[agent].nrows() {
            for c in 0..act[agent].ncols() {
                let mut p = act.to_vec();
                p[agent][[r, c]] += FD_STEP;
                let mut m = act.to_vec();
                m[agent][[r, c]] -= FD_STEP;
                nu.push(((forward(&p) - forward(&m)) * w).sum() / (2.0 * FD_STEP));
                an.push(d_in[agent][[r, 9 + c]]);
            }
        }
    }
    relative_error(&an, &nu)
}

fn criterion_2() -> Check {
    let t = Instant::now();
    let draws = 20;
    let mut heads = GroupErr::default();
    let mut trunk = GroupErr::default();
    let mut enc = GroupErr::default();
    let mut maps = GroupErr::default();
    let mut qh = GroupErr::default();
    let mut base = GroupErr::default();
    let mut act_in = GroupErr::default();
    for seed in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);

        let acfg = ActorConfig { trunk_widths: vec![12, 10], ..Default::default() };
        let net = ActorNet::new(0, 9, 3, &acfg, &mut rng).map_err(|e| e.to_string())?;
        let obs = Array2::from_shape_fn((4, 9), |_| rng.random_range(0.0..1.0));
        let noise = standard_normal(4, 3, &mut rng);
        let w = Array2::from_shape_fn((4, 3), |_| rng.random_range(-1.0..1.0));
        let beta = rng.random_range(0.01..0.5);
        let loss = |n: &ActorNet| {
            let f = n.forward(&obs, noise.clone()).unwrap();
            (&f.sample.action * &w).sum() + beta * f.sample.log_prob.sum()
        };
        let f = net.forward(&obs, noise.clone()).map_err(|e| e.to_string())?;
        let g = net.backward(&f, &w, &Array1::from_elem(4, beta)).map_err(|e| e.to_string())?;
        let errs = param_grad_errors(&net, &loss, &g);
        heads.add(&errs, |n| n.contains(".mean.") || n.contains(".log_std."));
        trunk.add(&errs, |n| n.contains(".trunk."));

        let n_agents = 2 + (seed as usize % 4);
        let ccfg = AttentionConfig { embed_dim: 6, attn_dim: 4, head_widths: vec![8, 5] };
        let critic = AttentionCritic::new(n_agents, 9, 3, &ccfg, &mut rng).map_err(|e| e.to_string())?;
        let (o, a) = joint(n_agents, 3, &mut rng);
        let dq = Array2::from_shape_fn((3, n_agents), |_| rng.random_range(-1.0..1.0));
        let loss = |m: &AttentionCritic| (m.forward(&o, &a).unwrap().0 * &dq).sum();
        let (_, cache) = critic.forward(&o, &a).map_err(|e| e.to_string())?;
        let (d_in, g) = critic.backward(&cache, &dq, true).map_err(|e| e.to_string())?;
        let errs = param_grad_errors(&critic, &loss, &g.expect("grads"));
        enc.add(&errs, |n| n.starts_with("critic.enc"));
        maps.add(&errs, |n| n.starts_with("critic.w_"));
        qh.add(&errs, |n| n.starts_with("critic.head"));
        let e = action_grad_error(&|acts| critic.forward(&o, acts).unwrap().0, &d_in, &a, &dq);
        act_in.add(&[("attention.action".into(), e)], |_| true);

        let b = BaselineCritic::new(n_agents, 9, 3, &BaselineConfig { widths: vec![8, 6] }, &mut rng)
            .map_err(|e| e.to_string())?;
        let loss = |m: &BaselineCritic| (m.forward(&o, &a).unwrap().0 * &dq).sum();
        let (_, cache) = b.forward(&o, &a).map_err(|e| e.to_string())?;
        let (d_in, g) = b.backward(&cache, &dq, true).map_err(|e| e.to_string())?;
        let errs = param_grad_errors(&b, &loss, &g.expect("grads"));
        let e = action_grad_error(&|acts| b.forward(&o, acts).unwrap().0, &d_in, &a, &dq);
        base.add(&[errs, vec![("baseline.action".into(), e)]].concat(), |_| true);
    }
    let groups = [
        ("actor heads", &heads),
        ("actor trunk", &trunk),
        ("encoders", &enc),
        ("attention maps", &maps),
        ("Q heads", &qh),
        ("critic action input", &act_in),
        ("baseline", &base),
    ];
    let ok = groups.iter().all(|(_, g)| g.draws >= 20 && g.worst <= 1e-5);
    let detail: Vec<String> = groups.iter().map(|(n, g)| format!("{n} {:.1e} ({} draws)", g.worst, g.draws)).collect();
    let secs = t.elapsed().as_secs_f64();
    Ok((ok && secs < 60.0, format!("{}; {secs:.1}s", detail.join(", "))))
}

// ---------------------------------------------------------------- desk runs

struct DeskRun {
    mode: CriticMode,
    seed: u64,
    outcome: RunOutcome,
    returns_csv: PathBuf,
}

fn desk_runs(root: &std::path::Path, seeds: u64) -> Result<Vec<DeskRun>, String> {
    let mut runs = Vec::new();
    for seed in 0..seeds {
        for mode in [CriticMode::Attention, CriticMode::Baseline] {
            let t = Instant::now();
            let mut cfg = desk();
            cfg.train.seed = seed;
            cfg.experiment.mode = mode;
            let dir = root.join(mode.to_string()).join(format!("seed_{seed}"));
            let outcome = run_experiment(&cfg, &dir).map_err(|e| format!("{mode} seed {seed}: {e}"))?;
            let r = outcome.report.mean_returns();
            eprintln!(
                "  desk {mode:>9} seed {seed}: first10 {:.3} last10 {:.3} ({:.0}s)",
                mean(&r[..10]),
                mean(&r[r.len() - 10..]),
                t.elapsed().as_secs_f64()
            );
            runs.push(DeskRun { mode, seed, outcome, returns_csv: dir.join("returns.csv") });
        }
    }
    Ok(runs)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

// ---------------------------------------------------------------- 3

fn criterion_3(runs: &[DeskRun]) -> Check {
    let mut audit = AttentionAudit::default();
    for r in runs.iter().filter(|r| r.mode == CriticMode::Attention) {
        audit.merge(&r.outcome.report.attention);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut uniform_gap: f64 = 0.0;
    for n in [2, 3, 6] {
        let c = AttentionCritic::new(n, 9, 3, &AttentionConfig::default(), &mut rng).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let e = Array1::from_shape_fn(c.embed_dim(), |_| rng.random_range(-3.0..3.0));
            let same = vec![e; n];
            for i in 0..n {
                let alpha = c.attention_weights(i, &same);
                let want = 1.0 / (n - 1) as f64;
                uniform_gap = alpha.iter().map(|a| (a - want).abs()).fold(uniform_gap, f64::max);
            }
        }
    }
    let ok = audit.vectors > 0
        && audit.violations == 0
        && audit.max_sum_error <= 1e-12
        && audit.min_weight >= 0.0
        && uniform_gap <= 1e-12;
    Ok((
        ok,
        format!(
            "{} attention vectors audited, {} violations, max |sum-1| {:.1e}, min weight {:.2e}; uniform gap {uniform_gap:.1e}",
            audit.vectors, audit.violations, audit.max_sum_error, audit.min_weight
        ),
    ))
}

// ---------------------------------------------------------------- 4

fn criterion_4(runs: &[DeskRun]) -> Check {
    // every environment step validates its allocation and aborts the run on
    // a violation, so a completed run is a violation-free run
    let steps: u64 = runs.iter().map(|r| r.outcome.report.env_steps).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut checked = 0;
    for _ in 0..100_000 {
        let l = rng.random_range(1..=4);
        let k = rng.random_range(0..=60);
        let n_ues = rng.random_range(0..=12);
        let ues: Vec<UEState> = (0..n_ues)
            .map(|n| {
                let mut u = UEState::new(n, rng.random_range(0..l), [30.0, 40.0], 5.0);
                u.active = rng.random_bool(0.7);
                u
            })
            .collect();
        let a = ActionVec::new((0..l).map(|_| if rng.random_bool(0.1) { 1.0 } else { rng.random_range(0.0..=1.0) }).collect());
        let alloc = action_to_allocation(&a, k, &ues).map_err(|e| e.to_string())?;
        let slices: Vec<usize> = ues.iter().map(|u| u.slice_id).collect();
        checked += 1;
        let used = alloc.ue_rb.iter().filter(|&&b| b).count();
        let overlap = (0..k).any(|rb| alloc.slice_rb.column(rb).iter().filter(|&&b| b).count() > 1);
        if alloc.validate(&slices).is_err() || used > k || overlap {
            violations += 1;
        }
    }
    Ok((
        violations == 0 && steps > 0,
        format!("{steps} validated environment steps across {} runs; {checked} random actions, {violations} violations", runs.len()),
    ))
}

// ---------------------------------------------------------------- 5

fn criterion_5(runs: &[DeskRun]) -> Check {
    let l = 3.0;
    let lo = runs.iter().map(|r| r.outcome.report.reward_min).fold(f64::INFINITY, f64::min);
    let hi = runs.iter().map(|r| r.outcome.report.reward_max).fold(f64::NEG_INFINITY, f64::max);

    let model = RadioConfig::default().resolve().map_err(|e| e.to_string())?;
    let slices = SliceDefaults::default().build(5);
    let ue_slices = [0, 0, 1, 1, 1, 1, 1, 2];
    let n = ue_slices.len();
    let window = |good: bool| -> Vec<SlotSample> {
        (0..model.slots_per_step)
            .map(|_| {
                let rates: Vec<f64> = ue_slices
                    .iter()
                    .map(|&s| match (good, s) {
                        (false, _) => 0.0,
                        (true, 0) => slices[0].lambda_target,
                        (true, 1) => slices[1].min_rate_bps * 2.0,
                        _ => 1e6,
                    })
                    .collect();
                // four of five MTC devices active: exactly the density target
                let mut active = vec![true; n];
                active[6] = !good;
                let bits = slices[2].lambda_target * 1e6;
                SlotSample { rates_bps: rates, active, arrivals: vec![Packet { ue: 7, bits, queue_ahead_bits: 0.0 }] }
            })
            .collect()
    };
    let best = compute_reward(&qos_metrics(&model, &slices, &ue_slices, &window(true)).map_err(|e| e.to_string())?);
    let worst = compute_reward(&qos_metrics(&model, &slices, &ue_slices, &window(false)).map_err(|e| e.to_string())?);
    Ok((
        lo >= 0.0 && hi <= l && best == l && worst == 0.0,
        format!("run rewards in [{lo:.3}, {hi:.3}] of [0, {l}]; all-satisfied fixture {best}, all-violated fixture {worst}"),
    ))
}

// ---------------------------------------------------------------- 6, 7

fn criterion_6(runs: &[DeskRun]) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for mode in [CriticMode::Attention, CriticMode::Baseline] {
        let mine: Vec<&DeskRun> = runs.iter().filter(|r| r.mode == mode).collect();
        let firsts: Vec<f64> = mine.iter().map(|r| mean(&r.outcome.report.mean_returns()[..10])).collect();
        let lasts: Vec<f64> = mine
            .iter()
            .map(|r| {
                let v = r.outcome.report.mean_returns();
                mean(&v[v.len() - 10..])
            })
            .collect();
        let improved = firsts.iter().zip(&lasts).filter(|(f, l)| l > f).count();
        let (f, l) = (mean(&firsts), mean(&lasts));
        ok &= l > f && mine.len() >= 5;
        parts.push(format!("{mode}: first10 {f:.3} -> last10 {l:.3}, improved on {improved}/{} seeds", mine.len()));
    }
    Ok((ok, parts.join("; ")))
}

fn criterion_7(runs: &[DeskRun], window: usize) -> Check {
    let mut triples = Vec::new();
    for r in runs.iter().filter(|r| r.mode == CriticMode::Attention) {
        let b = runs
            .iter()
            .find(|b| b.mode == CriticMode::Baseline && b.seed == r.seed)
            .ok_or("unpaired seed")?;
        triples.push((r.seed, r.returns_csv.clone(), b.returns_csv.clone()));
    }
    let s = compare_from_csvs(&triples, window).map_err(|e| e.to_string())?;
    let pairs: Vec<String> =
        s.rows.iter().map(|r| format!("s{} {:.2}/{:.2}", r.seed, r.attention, r.baseline)).collect();
    Ok((
        s.attention_mean >= s.baseline_mean && s.rows.len() >= 5,
        format!(
            "attention {:.3} vs baseline {:.3} ({:+.2}%), attention >= baseline on {}/{} seeds [{}]",
            s.attention_mean,
            s.baseline_mean,
            100.0 * s.relative_improvement,
            s.attention_wins,
            s.rows.len(),
            pairs.join(", ")
        ),
    ))
}

// ---------------------------------------------------------------- 8

fn criterion_8(root: &std::path::Path) -> Check {
    let mut tables = Vec::new();
    for (name, parallel) in [("par_a", true), ("par_b", true), ("seq", false)] {
        let mut cfg = desk();
        cfg.train.n_iterations = 20;
        cfg.train.seed = 7;
        cfg.train.parallel = parallel;
        let dir = root.join(name);
        run_experiment(&cfg, &dir).map_err(|e| e.to_string())?;
        tables.push(std::fs::read(dir.join("returns.csv")).map_err(|e| e.to_string())?);
    }
    let same_runs = tables[0] == tables[1];
    let same_sched = tables[0] == tables[2];
    Ok((
        same_runs && same_sched && !tables[0].is_empty(),
        format!(
            "returns.csv ({} bytes): repeat run identical {same_runs}, sequential vs parallel identical {same_sched}",
            tables[0].len()
        ),
    ))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Check {
    let cfg = ActorConfig { lr: 1e-3, beta_temp: 1e-3, ..Default::default() };
    let mut parts = Vec::new();
    let mut ok = true;
    for t in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + t);
        let target: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..0.95)).collect();
        let mut actor = SacActor::new(ActorNet::new(0, 9, 3, &cfg, &mut rng).map_err(|e| e.to_string())?, &cfg);
        let (g1, g2) = (target.clone(), target.clone());
        let critic = SyntheticCritic {
            q: move |a: &[f64]| -a.iter().zip(&g1).map(|(x, g)| (x - g).powi(2)).sum::<f64>(),
            grad: move |a: &[f64]| a.iter().zip(&g2).map(|(x, g)| -2.0 * (x - g)).collect::<Vec<_>>(),
        };
        let probes: Vec<Vec<f64>> = (0..8).map(|_| (0..9).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let mut reached = None;
        let mut dist = f64::INFINITY;
        for k in 1..=2000 {
            let obs = Array2::from_shape_fn((64, 9), |_| rng.random_range(0.0..1.0));
            actor.policy_update(&[obs], &[Array2::zeros((64, 3))], &critic, &mut rng).map_err(|e| e.to_string())?;
            if k % 25 == 0 || k == 2000 {
                dist = 0.0;
                for p in &probes {
                    let (a, _) = actor.net.act(p, ActMode::Deterministic, &mut rng).map_err(|e| e.to_string())?;
                    let d = a.slice_fractions.iter().zip(&target).map(|(x, g)| (x - g).powi(2)).sum::<f64>().sqrt();
                    dist = dist.max(d);
                }
                if dist < 0.05 {
                    reached = Some(k);
                    break;
                }
            }
        }
        ok &= reached.is_some();
        parts.push(match reached {
            Some(k) => format!("target {t}: {k} updates (dist {dist:.3})"),
            None => format!("target {t}: not reached (dist {dist:.3})"),
        });
    }
    Ok((ok, parts.join(", ")))
}

// ---------------------------------------------------------------- 10

fn criterion_10() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for mode in [CriticMode::Attention, CriticMode::Baseline] {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = 3;
        let small = AttentionConfig { embed_dim: 16, attn_dim: 8, head_widths: vec![16, 16] };
        let critic = Critic::new(mode, n, 9, 3, &small, &BaselineConfig { widths: vec![32, 32] }, &mut rng)
            .map_err(|e| e.to_string())?;
        let mut learner = CriticLearner::new(critic, 1e-3);
        let acfg = ActorConfig { trunk_widths: vec![16], ..Default::default() };
        let actors: Vec<SacActor> = (0..n)
            .map(|i| ActorNet::new(i, 9, 3, &acfg, &mut rng).map(|a| SacActor::new(a, &acfg)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let (obs, actions) = joint(n, 32, &mut rng);
        let (next_obs, _) = joint(n, 32, &mut rng);
        let rewards = Array2::from_shape_fn((32, n), |_| rng.random_range(0.0..3.0));
        let batch = JointBatch { obs, actions, rewards: rewards.clone(), next_obs };
        let cfg = CriticTargetConfig { gamma: 0.0, beta_temp: 0.0, polyak_mix: 0.005 };
        let y = learner.targets(&batch, &actors, &cfg, &mut rng).map_err(|e| e.to_string())?;
        let exact = y == rewards;
        let before = learner.td_loss(&batch, &y).map_err(|e| e.to_string())?;
        learner.update_towards(&batch, &y, cfg.polyak_mix).map_err(|e| e.to_string())?;
        let after = learner.td_loss(&batch, &y).map_err(|e| e.to_string())?;
        ok &= exact && after < before;
        parts.push(format!("{mode}: targets == rewards {exact}, loss {before:.4} -> {after:.4}"));
    }
    Ok((ok, parts.join("; ")))
}

// ----------------------------------------------------------------

fn main() -> ExitCode {
    let seeds: u64 = std::env::var("ACCEPTANCE_SEEDS").ok().and_then(|s| s.parse().ok()).unwrap_or(5);
    let scratch = tempfile::tempdir().expect("scratch directory");
    let mut results: Vec<(u32, &str, Check)> = Vec::new();

    results.push((1, "rate oracle equivalence", criterion_1()));
    results.push((2, "gradient integrity", criterion_2()));
    results.push((9, "SAC on a synthetic critic", criterion_9()));
    results.push((10, "degenerate soft targets", criterion_10()));

    eprintln!("training desk configuration: {seeds} seeds x 2 modes");
    let t = Instant::now();
    match desk_runs(&scratch.path().join("desk"), seeds) {
        Ok(runs) => {
            eprintln!("  desk runs took {:.0}s", t.elapsed().as_secs_f64());
            results.push((3, "attention law", criterion_3(&runs)));
            results.push((4, "allocation constraints", criterion_4(&runs)));
            results.push((5, "reward range", criterion_5(&runs)));
            results.push((6, "learning progress", criterion_6(&runs)));
            results.push((7, "attention vs baseline", criterion_7(&runs, desk().experiment.smoothing_window)));
        }
        Err(e) => {
            for (id, name) in [(3, "attention law"), (4, "allocation constraints"), (5, "reward range"), (6, "learning progress"), (7, "attention vs baseline")] {
                results.push((id, name, Err(format!("desk run failed: {e}"))));
            }
        }
    }
    results.push((8, "determinism", criterion_8(&scratch.path().join("determinism"))));

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (id, name, r) in &results {
        let (pass, detail) = match r {
            Ok((p, d)) => (*p, d.clone()),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!("{} criterion {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
