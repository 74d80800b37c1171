//! Episode loop: frame stacking, exploration noise, replay and updates.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hdpg_core::agent::{Agent, OuNoise};
use hdpg_core::envs::{
    reward_bounds, Environment, GridMdp, LineWalker, PlanarWalker, SummedReward,
};
use hdpg_core::nn::checkpoint::Checkpoint;
use hdpg_core::replay::{FrameStack, ReplayBuffer, Transition, TransitionDims, STACK_DEPTH};
use hdpg_core::seed::{SeedStreams, Stream};
use rand::Rng;

use crate::config::{EnvKind, RunConfig};
use crate::error::{io_err, HarnessError};
use crate::metrics::{MetricsRow, MetricsWriter};

pub fn build_env(cfg: &RunConfig) -> Result<Box<dyn Environment>, HarnessError> {
    let base: Box<dyn Environment> = match cfg.env {
        EnvKind::Grid => {
            let mut spec = GridMdp::gridworld().grid().clone();
            spec.max_steps = cfg.grid_max_steps;
            Box::new(GridMdp::new(spec)?)
        }
        EnvKind::Line => Box::new(LineWalker::new(cfg.line.clone())?),
        EnvKind::Walker => Box::new(PlanarWalker::new(cfg.walker.clone())?),
    };
    Ok(if cfg.summed_reward {
        Box::new(SummedReward::new(base))
    } else {
        base
    })
}

pub fn component_names(env: &dyn Environment) -> Vec<String> {
    env.spec().reward_names().iter().map(|s| s.to_string()).collect()
}

pub fn new_agent(cfg: &RunConfig, env: &dyn Environment) -> Result<Agent, HarnessError> {
    let spec = env.spec();
    let mut rng = SeedStreams::new(cfg.seed).rng(Stream::NetInit);
    Ok(Agent::new(
        cfg.agent.clone(),
        STACK_DEPTH * spec.obs_dim,
        spec.act_dim,
        reward_bounds(spec),
        &mut rng,
    )?)
}

/// Manifest stored alongside the networks: every config key under
/// `config.`, plus the config hash.
pub fn checkpoint_manifest(cfg: &RunConfig, episode: usize) -> BTreeMap<String, String> {
    let mut m: BTreeMap<String, String> = cfg
        .entries()
        .into_iter()
        .map(|(k, v)| (format!("config.{k}"), v))
        .collect();
    m.insert("config_hash".into(), cfg.hash());
    m.insert("episode".into(), episode.to_string());
    m
}

/// Run config recorded in a checkpoint manifest.
pub fn config_from_checkpoint(ckpt: &Checkpoint) -> Result<RunConfig, HarnessError> {
    let entries: Vec<(&str, &str)> = ckpt
        .manifest
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("config.").map(|k| (k, v.as_str())))
        .collect();
    if entries.is_empty() {
        return Err(HarnessError::Mismatch("checkpoint carries no run config".into()));
    }
    RunConfig::from_entries(entries)
}

/// Agent restored from `ckpt`, checked against the environment's shapes.
pub fn agent_from_checkpoint(
    cfg: &RunConfig,
    env: &dyn Environment,
    ckpt: &Checkpoint,
) -> Result<Agent, HarnessError> {
    let spec = env.spec();
    let obs = STACK_DEPTH * spec.obs_dim;
    let first = ckpt
        .actor
        .first()
        .ok_or_else(|| HarnessError::Mismatch("checkpoint actor has no layers".into()))?;
    let last = ckpt.actor.last().expect("non-empty");
    if first.cols != obs || last.rows != spec.act_dim {
        return Err(HarnessError::Mismatch(format!(
            "checkpoint actor maps {} -> {}, env {} needs {} -> {} ({} stacked frames of {})",
            first.cols, last.rows, spec.name, obs, spec.act_dim, STACK_DEPTH, spec.obs_dim
        )));
    }
    Ok(Agent::from_checkpoint(cfg.agent.clone(), reward_bounds(spec), ckpt)?)
}

pub struct TrainOutcome {
    pub agent: Agent,
    pub rows: Vec<MetricsRow>,
    pub total_steps: u64,
    pub checkpoints: Vec<PathBuf>,
}

struct Output {
    dir: PathBuf,
    metrics: MetricsWriter,
    timing: fs::File,
}

fn write_checkpoint(dir: &Path, name: &str, agent: &Agent, cfg: &RunConfig, ep: usize) -> Result<PathBuf, HarnessError> {
    let path = dir.join(name);
    let bytes = agent.to_checkpoint(checkpoint_manifest(cfg, ep)).encode();
    fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

/// Trains one agent. With `out` set, writes `metrics.csv`, `timing.csv`
/// and checkpoints there.
pub fn train(cfg: &RunConfig, out: Option<&Path>) -> Result<TrainOutcome, HarnessError> {
    cfg.validate()?;
    let mut env = build_env(cfg)?;
    let spec = env.spec().clone();
    let names = component_names(env.as_ref());
    let mut agent = new_agent(cfg, env.as_ref())?;

    let mut output = match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            let metrics = MetricsWriter::create(&dir.join("metrics.csv"), &cfg.hash(), &names)?;
            let tp = dir.join("timing.csv");
            let mut timing = fs::File::create(&tp).map_err(|e| io_err(&tp, e))?;
            writeln!(timing, "episode,wall_ms").map_err(|e| io_err(&tp, e))?;
            Some(Output {
                dir: dir.to_path_buf(),
                metrics,
                timing,
            })
        }
        None => None,
    };

    let streams = SeedStreams::new(cfg.seed);
    let mut env_rng = streams.rng(Stream::Env);
    let mut noise_rng = streams.rng(Stream::Noise);
    let mut replay_rng = streams.rng(Stream::Replay);

    let stacked = STACK_DEPTH * spec.obs_dim;
    let mut buffer = ReplayBuffer::new(
        cfg.agent.replay_capacity,
        TransitionDims {
            state: stacked,
            action: spec.act_dim,
            reward: spec.k(),
        },
    )?;
    let mut frames = FrameStack::new(spec.obs_dim);
    let mut ou = OuNoise::new(spec.act_dim, cfg.agent.noise);
    let normalizer = agent.normalizer().clone();

    let mut rows = Vec::with_capacity(cfg.episodes);
    let mut checkpoints = Vec::new();
    let mut total_steps = 0u64;
    let mut last_ep = 0;

    'episodes: for ep in 0..cfg.episodes {
        let started = Instant::now();
        last_ep = ep;
        if agent.begin_episode(ep) {
            log::debug!("episode {ep}: weights {:?}", agent.weights().m);
        }
        let first = env.reset(env_rng.gen());
        let mut state = frames.reset(&first)?;
        ou.reset();

        let mut ret_raw = vec![0.0; spec.k()];
        let mut ret_norm = vec![0.0; spec.k()];
        let (mut steps, mut ep_updates) = (0usize, 0u64);
        let (mut loss_sum, mut grad_sum) = (0.0, 0.0);
        let mut stop = false;
        loop {
            let action = agent.select_action(&state, Some((&mut ou, &mut noise_rng)))?;
            let r = env.step(&spec.scale_action(&action))?;
            let next = frames.push(&r.obs)?;
            agent.observe_reward(&r.reward);
            for (acc, v) in ret_raw.iter_mut().zip(&r.reward) {
                *acc += v;
            }
            for (acc, v) in ret_norm.iter_mut().zip(normalizer.normalize(&r.reward)) {
                *acc += v;
            }
            buffer.push(Transition {
                state: std::mem::replace(&mut state, next.clone()),
                action,
                reward: r.reward,
                next_state: next,
                done: r.done,
            })?;
            steps += 1;
            total_steps += 1;
            if buffer.len() >= cfg.agent.batch {
                let batch = buffer.sample(cfg.agent.batch, &mut replay_rng)?;
                let s = agent.update(&batch)?;
                loss_sum += s.critic_loss;
                grad_sum += s.actor_grad_norm;
                ep_updates += 1;
                if cfg.max_updates > 0 && agent.updates() >= cfg.max_updates {
                    stop = true;
                }
            }
            if r.done || r.truncated || stop {
                break;
            }
        }

        let per = |s: f64| if ep_updates > 0 { s / ep_updates as f64 } else { 0.0 };
        let row = MetricsRow {
            episode: ep,
            steps,
            total_steps,
            total_return: ret_raw.iter().sum(),
            ret_raw,
            ret_norm,
            m: agent.component_weights(),
            critic_loss: per(loss_sum),
            actor_grad_norm: per(grad_sum),
            updates: ep_updates,
        };
        if let Some(o) = output.as_mut() {
            o.metrics.write(&row)?;
            writeln!(o.timing, "{ep},{}", started.elapsed().as_millis())
                .map_err(|e| HarnessError::Io(format!("timing: {e}")))?;
            if (ep + 1) % cfg.checkpoint_every == 0 {
                checkpoints.push(write_checkpoint(
                    &o.dir,
                    &format!("checkpoint_ep{}.bin", ep + 1),
                    &agent,
                    cfg,
                    ep + 1,
                )?);
            }
        }
        if ep % 50 == 0 || ep + 1 == cfg.episodes {
            log::info!(
                "{} seed {} episode {ep}: steps {steps} return {:.3}",
                cfg.algo(),
                cfg.seed,
                row.total_return
            );
        }
        rows.push(row);
        if stop {
            break 'episodes;
        }
    }

    if let Some(o) = output.as_ref() {
        checkpoints.push(write_checkpoint(&o.dir, "checkpoint_final.bin", &agent, cfg, last_ep + 1)?);
    }
    Ok(TrainOutcome {
        agent,
        rows,
        total_steps,
        checkpoints,
    })
}

/// Mean `total_return` over the last tenth of the episodes (at least one).
pub fn final_window_mean(rows: &[MetricsRow]) -> f64 {
    if rows.is_empty() {
        return f64::NAN;
    }
    let n = rows.len().div_ceil(10);
    rows[rows.len() - n..].iter().map(|r| r.total_return).sum::<f64>() / n as f64
}
