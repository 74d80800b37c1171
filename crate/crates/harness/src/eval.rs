//! Push-recovery benchmark.
//!
//! Each trial resets a walker, applies one push of the given magnitude at a
//! random onset and counts a success when the fall predicate stays clear
//! until `recovery` seconds after onset. The policy acts without noise.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hdpg_core::agent::Agent;
use hdpg_core::envs::{apply_push, Environment, PlanarWalker, PushEvent, WalkerConfig};
use hdpg_core::nn::checkpoint::Checkpoint;
use hdpg_core::replay::FrameStack;
use hdpg_core::seed::{SeedStreams, Stream};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{EnvKind, EvalConfig};
use crate::error::{io_err, HarnessError};
use crate::train::{agent_from_checkpoint, build_env, config_from_checkpoint};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub magnitude: f64,
    pub successes: usize,
    pub trials: usize,
}

impl EvalRow {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Exact `successes/trials`.
    pub fn fraction(&self) -> String {
        format!("{}/{}", self.successes, self.trials)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub seed: u64,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("magnitude,successes,trials,rate,fraction\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.magnitude,
                r.successes,
                r.trials,
                r.rate(),
                r.fraction()
            );
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub success: bool,
    pub steps: usize,
    pub onset: f64,
}

/// One push trial with child stream `index` of the eval stream.
pub fn run_trial(
    agent: &Agent,
    walker: &WalkerConfig,
    eval: &EvalConfig,
    magnitude: f64,
    streams: SeedStreams,
    index: u32,
) -> Result<TrialOutcome, HarnessError> {
    let mut rng = streams.child(Stream::Eval, index);
    let event = PushEvent::random(magnitude, eval.duration, eval.onset_window, &mut rng);
    let reset_seed: u64 = rng.gen();
    let dt = walker.control_dt();
    let horizon = ((event.onset + eval.recovery) / dt).ceil() as usize;
    let mut cfg = walker.clone();
    cfg.max_steps = cfg.max_steps.max(horizon + 1);
    let mut env = apply_push(PlanarWalker::new(cfg)?, event)?;
    let spec = env.spec().clone();
    let mut frames = FrameStack::new(spec.obs_dim);
    let mut state = frames.reset(&env.reset(reset_seed))?;
    for step in 0..horizon {
        let a = agent.select_action::<ChaCha8Rng>(&state, None)?;
        let r = env.step(&spec.scale_action(&a))?;
        if r.done {
            return Ok(TrialOutcome {
                success: false,
                steps: step + 1,
                onset: event.onset,
            });
        }
        state = frames.push(&r.obs)?;
    }
    Ok(TrialOutcome {
        success: true,
        steps: horizon,
        onset: event.onset,
    })
}

/// Runs every (magnitude, trial) pair in parallel; results are reduced in
/// trial order.
pub fn evaluate_push(
    agent: &Agent,
    walker: &WalkerConfig,
    eval: &EvalConfig,
    seed: u64,
) -> Result<EvalReport, HarnessError> {
    if eval.trials == 0 {
        return Err(HarnessError::Config("trials must be at least 1".into()));
    }
    if eval.trials > 1 << 16 || eval.magnitudes.len() > 1 << 16 {
        return Err(HarnessError::Config("at most 65536 trials and magnitudes".into()));
    }
    if let Some(m) = eval.magnitudes.iter().find(|m| !(**m >= 0.0 && m.is_finite())) {
        return Err(HarnessError::Config(format!("push magnitude must be non-negative, got {m}")));
    }
    let streams = SeedStreams::new(seed);
    let mut rows = Vec::with_capacity(eval.magnitudes.len());
    for (mi, &magnitude) in eval.magnitudes.iter().enumerate() {
        let outcomes: Vec<Result<TrialOutcome, HarnessError>> = (0..eval.trials)
            .into_par_iter()
            .map(|t| {
                let index = ((mi as u32) << 16) | t as u32;
                run_trial(agent, walker, eval, magnitude, streams, index)
            })
            .collect();
        let mut successes = 0;
        for o in outcomes {
            successes += usize::from(o?.success);
        }
        rows.push(EvalRow {
            magnitude,
            successes,
            trials: eval.trials,
        });
    }
    Ok(EvalReport { seed, rows })
}

/// Loads a checkpoint, rebuilds its walker and evaluates it. Eval settings
/// come from the checkpoint's config unless overridden. The checkpoint file
/// is only read.
pub fn evaluate_checkpoint(
    path: &Path,
    magnitudes: Option<Vec<f64>>,
    trials: Option<usize>,
    seed: u64,
) -> Result<EvalReport, HarnessError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let ckpt = Checkpoint::decode(&bytes)?;
    let cfg = config_from_checkpoint(&ckpt)?;
    if cfg.env != EnvKind::Walker {
        return Err(HarnessError::Mismatch(format!(
            "push evaluation needs a walker checkpoint, this one was trained on {}",
            cfg.env.name()
        )));
    }
    let env = build_env(&cfg)?;
    let agent = agent_from_checkpoint(&cfg, env.as_ref(), &ckpt)?;
    let mut eval = cfg.eval.clone();
    if let Some(m) = magnitudes {
        eval.magnitudes = m;
    }
    if let Some(t) = trials {
        eval.trials = t;
    }
    evaluate_push(&agent, &cfg.walker, &eval, seed)
}

pub fn write_report(report: &EvalReport, out: &Path) -> Result<std::path::PathBuf, HarnessError> {
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let path = out.join("eval_push.csv");
    fs::write(&path, report.to_csv()).map_err(|e| io_err(&path, e))?;
    Ok(path)
}
