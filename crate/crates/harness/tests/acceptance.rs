//! Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use hdpg_core::agent::{compute_priority_weights, Algo, RewardStats};
use hdpg_core::envs::{reward_bounds, Environment, GridMdp, PlanarWalker, WalkerConfig};
use hdpg_core::nn::{Activation, MlpParams, MlpSpec};
use hdpg_harness::compare::compare;
use hdpg_harness::train::train;
use hdpg_harness::RunConfig;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(
        elapsed <= limit,
        format!("took {:.1}s, limit {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()),
    )
}

fn gradient_oracle() -> Outcome {
    let start = Instant::now();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    let mut nets = 0;
    while nets < 100 {
        let depth = rng.gen_range(2..=4);
        let sizes: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=6)).collect();
        let hidden = if rng.gen_bool(0.5) { Activation::Tanh } else { Activation::Relu };
        let output = if rng.gen_bool(0.5) { Activation::Tanh } else { Activation::Linear };
        let mut net = MlpParams::init_with_rng(MlpSpec::new(sizes.clone(), hidden, output), &mut rng)
            .map_err(|e| e.to_string())?;
        if net.param_count() > 200 {
            continue;
        }
        for v in net.values_mut() {
            *v += rng.gen_range(-0.3..0.3);
        }
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..*sizes.last().unwrap()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, cache) = net.forward(&x).map_err(|e| e.to_string())?;
        let pre = cache.pre_activations();
        if hidden == Activation::Relu && pre[..pre.len() - 1].iter().flatten().any(|z| z.abs() < 1e-4) {
            continue;
        }
        nets += 1;
        let (grads, _) = net.backward(&cache, &g).map_err(|e| e.to_string())?;
        let f = |n: &MlpParams| -> f64 {
            n.output(&x).unwrap().iter().zip(&g).map(|(a, b)| a * b).sum()
        };
        let analytic: Vec<f64> = grads.values().copied().collect();
        let mut probe = net.clone();
        for (i, a) in analytic.iter().enumerate() {
            let orig = *probe.values_mut().nth(i).unwrap();
            *probe.values_mut().nth(i).unwrap() = orig + 1e-5;
            let up = f(&probe);
            *probe.values_mut().nth(i).unwrap() = orig - 1e-5;
            let down = f(&probe);
            *probe.values_mut().nth(i).unwrap() = orig;
            worst = worst.max(rel(*a, (up - down) / 2e-5));
        }
    }
    ensure(worst < 1e-4, format!("max relative error {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("100 nets, max relative error {worst:.2e}"))
}

fn priority_weights() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for draw in 0..10_000 {
        let k = rng.gen_range(1..=8);
        let stats = RewardStats {
            mean: (0..k).map(|_| rng.gen_range(0.0..=1.0)).collect(),
            variance: (0..k).map(|_| rng.gen_range(0.0..=0.25)).collect(),
        };
        let m = compute_priority_weights(&stats).m;
        let sum: f64 = m.iter().sum();
        ensure((sum - k as f64).abs() <= 1e-12, format!("draw {draw}: sum {sum} for K={k}"))?;
        ensure(m.iter().all(|&v| v > 0.0), format!("draw {draw}: non-positive weight"))?;
        let sym = compute_priority_weights(&RewardStats {
            mean: vec![stats.mean[0]; k],
            variance: vec![stats.variance[0]; k],
        });
        ensure(
            sym.m.iter().all(|v| (v - 1.0).abs() <= 1e-12),
            format!("draw {draw}: symmetric stats gave {:?}", sym.m),
        )?;
    }
    let m = compute_priority_weights(&RewardStats {
        mean: vec![0.5, 0.2],
        variance: vec![0.01, 0.09],
    })
    .m;
    let (x0, x1) = (0.5 + 0.01f64.exp(), 0.2 + 0.09f64.exp());
    let oracle = [2.0 * x0 / (x0 + x1), 2.0 * x1 / (x0 + x1)];
    for i in 0..2 {
        ensure((m[i] - oracle[i]).abs() < 1e-5, format!("worked example m={m:?}"))?;
    }
    ensure((m[0] - 1.07699).abs() < 1e-5 && (m[1] - 0.92301).abs() < 1e-5, format!("m={m:?}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("10^4 draws, worked example m=[{:.5}, {:.5}]", m[0], m[1]))
}

fn tabular_decomposition() -> Outcome {
    let start = Instant::now();
    let mdp = GridMdp::gridworld();
    let g = mdp.grid();
    ensure(g.n_states <= 10 && g.k() == 3, "gridworld shape")?;
    let n = g.n_states;
    let policy = vec![vec![1.0 / g.n_actions as f64; g.n_actions]; n];
    let gamma = 0.9;
    let heads = mdp
        .evaluate_policy(&policy, gamma, 1e-13, 100_000)
        .map_err(|e| e.to_string())?
        .total();
    let total = |s: usize, a: usize| g.rewards[s][a].iter().sum::<f64>();
    let mut lhs = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for s in (0..n).filter(|&s| !g.terminal[s]) {
        for a in 0..g.n_actions {
            rhs[s] += policy[s][a] * total(s, a);
            for sp in (0..n).filter(|&sp| !g.terminal[sp]) {
                lhs[(s, sp)] -= gamma * policy[s][a] * g.transitions[s][a][sp];
            }
        }
    }
    let v = lhs.lu().solve(&rhs).ok_or("singular system")?;
    let mut worst: f64 = 0.0;
    for s in (0..n).filter(|&s| !g.terminal[s]) {
        for a in 0..g.n_actions {
            let next: f64 = (0..n)
                .filter(|&sp| !g.terminal[sp])
                .map(|sp| g.transitions[s][a][sp] * v[sp])
                .sum();
            worst = worst.max((heads[s][a] - (total(s, a) + gamma * next)).abs());
        }
    }
    ensure(worst <= 1e-8, format!("sup norm {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("sup norm {worst:.2e}"))
}

fn reduction_invariant() -> Outcome {
    let start = Instant::now();
    let mut cfg = common::line_config();
    cfg.summed_reward = true;
    cfg.seed = 7;
    cfg.episodes = 100;
    cfg.max_updates = 1000;
    // Short refresh cycle so the K=1 weight path actually runs.
    cfg.agent.weight_period = 2;
    cfg.agent.stats_window = 200;
    let mut run = |algo: Algo| -> Result<Vec<u64>, String> {
        cfg.agent.algo = algo;
        let out = train(&cfg, None).map_err(|e| e.to_string())?;
        ensure(out.agent.updates() == 1000, format!("{} updates", out.agent.updates()))?;
        Ok(out.agent.parameter_vector().iter().map(|v| v.to_bits()).collect())
    };
    let hdpg = run(Algo::Hdpg)?;
    let ddpg = run(Algo::Ddpg)?;
    ensure(hdpg.len() == ddpg.len(), "parameter counts differ")?;
    let differing = hdpg.iter().zip(&ddpg).filter(|(a, b)| a != b).count();
    ensure(differing == 0, format!("{differing} parameters differ"))?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{} parameters bit-identical after 1000 updates", hdpg.len()))
}

fn directional_learning() -> Outcome {
    let start = Instant::now();
    let base = common::line_config();
    let configs: Vec<(String, RunConfig)> = [Algo::Ddpg, Algo::Mhddpg, Algo::Hdpg]
        .into_iter()
        .map(|a| {
            let mut c = base.clone();
            c.agent.algo = a;
            (a.name().to_string(), c)
        })
        .collect();
    let seeds: Vec<u64> = (0..10).collect();
    let report = compare(&configs, &seeds, None).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mean = |l: &str| report.mean(l).unwrap();
    let hd = report.pair("ddpg", "hdpg").unwrap();
    let ordering = mean("hdpg") >= mean("mhddpg") && mean("mhddpg") >= mean("ddpg");
    let hdpg_better = hd.p_b_greater < 0.10;
    let hdpg_worse = hd.p_a_greater < 0.10;
    let summary = format!(
        "means ddpg {:.3} mhddpg {:.3} hdpg {:.3}; hdpg vs ddpg wins {}-{} (ties {}), p(hdpg>ddpg) {:.3}, p(ddpg>hdpg) {:.3}; ordering {}; {:.0}s",
        mean("ddpg"),
        mean("mhddpg"),
        mean("hdpg"),
        hd.wins_b,
        hd.wins_a,
        hd.ties,
        hd.p_b_greater,
        hd.p_a_greater,
        if ordering && hdpg_better { "holds" } else { "not significant" },
        elapsed.as_secs_f64()
    );
    ensure(!hdpg_worse, format!("hdpg significantly worse than ddpg: {summary}"))?;
    within(elapsed, Duration::from_secs(15 * 60))?;
    Ok(summary)
}

fn weight_schedule() -> Outcome {
    let mut cfg = common::line_config();
    cfg.agent.algo = Algo::Hdpg;
    let out = train(&cfg, None).map_err(|e| e.to_string())?;
    let t = cfg.agent.weight_period;
    let mut changes = 0;
    for (i, row) in out.rows.iter().enumerate() {
        let sum: f64 = row.m.iter().sum();
        ensure((sum - row.m.len() as f64).abs() <= 1e-9, format!("episode {i}: sum {sum}"))?;
        if i > 0 && row.m != out.rows[i - 1].m {
            ensure(i % t == 0, format!("weights changed at episode {i}"))?;
            changes += 1;
        }
    }
    ensure(changes > 0, "weights never refreshed")?;
    Ok(format!("{} episodes, {changes} refreshes, all at multiples of {t}", out.rows.len()))
}

fn normalization() -> Outcome {
    let mut env = PlanarWalker::new(WalkerConfig::default()).map_err(|e| e.to_string())?;
    let spec = env.spec().clone();
    let norm = reward_bounds(&spec);
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    env.reset(0);
    let mut episode = 0;
    for step in 0..100_000 {
        let u: Vec<f64> = (0..spec.act_dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let r = env.step(&spec.scale_action(&u)).map_err(|e| e.to_string())?;
        for (k, (&v, &(lo, hi))) in r.reward.iter().zip(norm.bounds()).enumerate() {
            let n = (v - lo) / (hi - lo);
            ensure((0.0..=1.0).contains(&n), format!("step {step} component {k}: {n}"))?;
        }
        if r.done || r.truncated {
            episode += 1;
            env.reset(episode);
        }
    }
    let (lo, hi) = norm.bounds()[0];
    let mut raw = vec![0.0; spec.k()];
    raw[0] = lo;
    ensure(norm.normalize(&raw)[0] == 0.0, "gait min does not map to 0")?;
    raw[0] = hi;
    ensure(norm.normalize(&raw)[0] == 1.0, "gait max does not map to 1")?;
    Ok(format!("10^5 steps over {} episodes in [0,1]; gait endpoints exact", episode + 1))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let mut cfg = common::line_config();
    cfg.episodes = 30;
    let conf = d.join("line.conf");
    common::write_config(&cfg, &conf);
    let mut metrics = Vec::new();
    let mut finals = Vec::new();
    for run in ["a", "b"] {
        let out = d.join(run);
        let o = common::run_cli(&["train", "--config", conf.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        ensure(o.status.success(), String::from_utf8_lossy(&o.stderr).to_string())?;
        metrics.push(std::fs::read(out.join("metrics.csv")).map_err(|e| e.to_string())?);
        finals.push(std::fs::read(out.join("checkpoint_final.bin")).map_err(|e| e.to_string())?);
    }
    ensure(metrics[0] == metrics[1], "metrics.csv differs between runs")?;
    ensure(finals[0] == finals[1], "final checkpoint differs between runs")?;
    let ckpt = common::stance_checkpoint(d);
    let mut evals = Vec::new();
    for run in ["ea", "eb"] {
        let out = d.join(run);
        let o = common::run_cli(&[
            "eval-push", "--checkpoint", ckpt.to_str().unwrap(), "--magnitudes", "0,10,14",
            "--trials", "8", "--seed", "5", "--out", out.to_str().unwrap(),
        ]);
        ensure(o.status.success(), String::from_utf8_lossy(&o.stderr).to_string())?;
        evals.push(std::fs::read(out.join("eval_push.csv")).map_err(|e| e.to_string())?);
    }
    ensure(evals[0] == evals[1], "eval_push.csv differs between runs")?;
    Ok(format!("metrics.csv ({} bytes), final checkpoint and eval_push.csv identical", metrics[0].len()))
}

fn physics_sanity() -> Outcome {
    let mut worst: f64 = f64::NEG_INFINITY;
    for seed in 0..5u64 {
        let mut w = PlanarWalker::new(WalkerConfig::default()).map_err(|e| e.to_string())?;
        w.reset(seed);
        let mut s = *w.state();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in s.qd.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        s.q[1] += 0.1;
        w.set_state(s);
        let mut e = w.mechanical_energy();
        for step in 0..1000 {
            w.step_torques(&[0.0; 4]).map_err(|e| e.to_string())?;
            let e2 = w.mechanical_energy();
            let rise = (e2 - e) / e.abs().max(1e-12);
            worst = worst.max(rise);
            ensure(rise <= 1e-6, format!("seed {seed} step {step}: energy {e} -> {e2}"))?;
            e = e2;
        }
    }
    let mut env = PlanarWalker::new(WalkerConfig::default()).map_err(|e| e.to_string())?;
    let spec = env.spec().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    env.reset(0);
    let mut resets = 0u64;
    for step in 0..1_000_000u64 {
        let u: Vec<f64> = (0..spec.act_dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let r = env.step(&spec.scale_action(&u)).map_err(|e| format!("step {step}: {e}"))?;
        ensure(
            r.obs.iter().chain(&r.reward).all(|v| v.is_finite()),
            format!("non-finite value at step {step}"),
        )?;
        if r.done || r.truncated {
            resets += 1;
            env.reset(resets);
        }
    }
    Ok(format!("max relative energy rise {worst:.2e}; 10^6 random steps finite ({resets} resets)"))
}

fn push_protocol() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ckpt = common::stance_checkpoint(dir.path());
    let out = dir.path().join("eval");
    let start = Instant::now();
    let o = common::run_cli(&[
        "eval-push", "--checkpoint", ckpt.to_str().unwrap(), "--magnitudes", "0,6,8,10,12,14",
        "--trials", "100", "--seed", "0", "--out", out.to_str().unwrap(),
    ]);
    let elapsed = start.elapsed();
    ensure(o.status.success(), String::from_utf8_lossy(&o.stderr).to_string())?;
    let csv = std::fs::read_to_string(out.join("eval_push.csv")).map_err(|e| e.to_string())?;
    let mut rates = Vec::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        ensure(f.len() == 5, format!("bad row {line}"))?;
        let magnitude: f64 = f[0].parse().map_err(|_| "magnitude")?;
        let successes: usize = f[1].parse().map_err(|_| "successes")?;
        let trials: usize = f[2].parse().map_err(|_| "trials")?;
        let rate: f64 = f[3].parse().map_err(|_| "rate")?;
        ensure(trials == 100 && successes <= trials, format!("bad counts {line}"))?;
        ensure(rate == successes as f64 / trials as f64, format!("rate not exact: {line}"))?;
        ensure(f[4] == format!("{successes}/{trials}"), format!("fraction not exact: {line}"))?;
        if magnitude == 0.0 {
            ensure(successes == trials, format!("unpushed stance fell: {line}"))?;
        }
        rates.push(format!("{magnitude}N {}", f[4]));
    }
    ensure(rates.len() == 6, "expected six magnitudes")?;
    within(elapsed, Duration::from_secs(600))?;
    Ok(format!("{} in {:.1}s", rates.join(", "), elapsed.as_secs_f64()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("gradient oracle", gradient_oracle),
        ("priority weights", priority_weights),
        ("tabular decomposition", tabular_decomposition),
        ("reduction invariant", reduction_invariant),
        ("directional learning", directional_learning),
        ("weight schedule", weight_schedule),
        ("normalization", normalization),
        ("determinism", determinism),
        ("physics sanity", physics_sanity),
        ("push protocol", push_protocol),
    ];
    let only: Vec<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n:>2} {name}: PASS ({secs:.1}s) {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} {name}: FAIL ({secs:.1}s) {why}");
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
