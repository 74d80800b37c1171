//! Flat `key = value` run configuration with `[run]`, `[agent]`, `[env]` and
//! `[eval]` sections.
//!
//! Every key has a default; unknown keys and malformed values are errors.
//! Environment constants live in `[env]` under `line.*`, `walker.*` and
//! `grid.*`.

use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use hdpg_core::agent::{AgentConfig, Algo, OuParams};
use hdpg_core::envs::{LineConfig, WalkerConfig};
use sha2::{Digest, Sha256};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Grid,
    Line,
    Walker,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Grid => "grid",
            EnvKind::Line => "line",
            EnvKind::Walker => "walker",
        }
    }
}

impl FromStr for EnvKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "grid" => Ok(EnvKind::Grid),
            "line" => Ok(EnvKind::Line),
            "walker" => Ok(EnvKind::Walker),
            other => Err(HarnessError::Config(format!(
                "unknown env '{other}' (expected grid, line or walker)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub magnitudes: Vec<f64>,
    pub trials: usize,
    /// Seconds the walker must stay up after push onset.
    pub recovery: f64,
    /// Push onset is uniform in `[0, onset_window)` seconds.
    pub onset_window: f64,
    pub duration: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            magnitudes: vec![6.0, 8.0, 10.0, 12.0, 14.0],
            trials: 100,
            recovery: 10.0,
            onset_window: 5.0,
            duration: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: EnvKind,
    pub seed: u64,
    pub episodes: usize,
    pub out: PathBuf,
    pub checkpoint_every: usize,
    /// Collapse the reward vector to its sum before the agent sees it.
    pub summed_reward: bool,
    /// Stop after this many gradient updates (0 = no limit).
    pub max_updates: u64,
    pub agent: AgentConfig,
    pub line: LineConfig,
    pub walker: WalkerConfig,
    pub grid_max_steps: usize,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: EnvKind::Line,
            seed: 0,
            episodes: 300,
            out: PathBuf::from("runs/default"),
            checkpoint_every: 500,
            summed_reward: false,
            max_updates: 0,
            agent: AgentConfig::default(),
            line: LineConfig::default(),
            walker: WalkerConfig::default(),
            grid_max_steps: 50,
            eval: EvalConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| HarnessError::Config(format!("bad value '{value}' for {key}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, HarnessError>
where
    T::Err: Display,
{
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn join<T: Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

macro_rules! walker_keys {
    ($m:ident) => {
        $m!(
            torso_mass, thigh_mass, shank_mass, torso_length, thigh_length, shank_length,
            gravity, kp, kd, tau_max, contact_stiffness, contact_damping, friction,
            tangential_stiffness, tangential_damping, dt_phys, substeps, max_steps, hip_limit,
            knee_max, w_gait, w_step, w_torque, w_height, w_orientation, fall_penalty,
            fall_height_fraction, fall_pitch, max_speed, min_swing, stance_split, init_noise,
            energy_projection
        )
    };
}

macro_rules! line_keys {
    ($m:ident) => {
        $m!(dt, drag, v_max, max_steps, effort_weight, alive_bonus, crash_penalty)
    };
}

impl RunConfig {
    pub fn algo(&self) -> Algo {
        self.agent.algo
    }

    /// Sets one `section.key`.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), HarnessError> {
        let full = format!("{section}.{key}");
        let k = full.as_str();
        match (section, key) {
            ("run", "algo") => self.agent.algo = value.parse().map_err(HarnessError::from)?,
            ("run", "env") => self.env = value.parse()?,
            ("run", "seed") => self.seed = parse(k, value)?,
            ("run", "episodes") => self.episodes = parse(k, value)?,
            ("run", "out") => self.out = PathBuf::from(value),
            ("run", "checkpoint_every") => self.checkpoint_every = parse(k, value)?,
            ("run", "summed_reward") => self.summed_reward = parse(k, value)?,
            ("run", "max_updates") => self.max_updates = parse(k, value)?,
            ("agent", "gamma") => self.agent.gamma = parse(k, value)?,
            ("agent", "lr_actor") => self.agent.lr_actor = parse(k, value)?,
            ("agent", "lr_critic") => self.agent.lr_critic = parse(k, value)?,
            ("agent", "batch") => self.agent.batch = parse(k, value)?,
            ("agent", "tau") => self.agent.tau = parse(k, value)?,
            ("agent", "weight_period") => self.agent.weight_period = parse(k, value)?,
            ("agent", "stats_window") => self.agent.stats_window = parse(k, value)?,
            ("agent", "ou_theta") => self.agent.noise.theta = parse(k, value)?,
            ("agent", "ou_sigma") => self.agent.noise.sigma = parse(k, value)?,
            ("agent", "ou_dt") => self.agent.noise.dt = parse(k, value)?,
            ("agent", "actor_hidden") => self.agent.actor_hidden = parse_list(k, value)?,
            ("agent", "critic_branch") => self.agent.critic_branch = parse(k, value)?,
            ("agent", "critic_trunk") => self.agent.critic_trunk = parse(k, value)?,
            ("agent", "replay_capacity") => self.agent.replay_capacity = parse(k, value)?,
            ("eval", "magnitudes") => self.eval.magnitudes = parse_list(k, value)?,
            ("eval", "trials") => self.eval.trials = parse(k, value)?,
            ("eval", "recovery") => self.eval.recovery = parse(k, value)?,
            ("eval", "onset_window") => self.eval.onset_window = parse(k, value)?,
            ("eval", "duration") => self.eval.duration = parse(k, value)?,
            ("env", "grid.max_steps") => self.grid_max_steps = parse(k, value)?,
            ("env", other) => {
                if let Some(name) = other.strip_prefix("line.") {
                    macro_rules! set_line {
                        ($($f:ident),*) => {
                            match name {
                                $(stringify!($f) => self.line.$f = parse(k, value)?,)*
                                _ => return Err(HarnessError::Config(format!("unknown key {k}"))),
                            }
                        };
                    }
                    line_keys!(set_line);
                } else if let Some(name) = other.strip_prefix("walker.") {
                    macro_rules! set_walker {
                        ($($f:ident),*) => {
                            match name {
                                $(stringify!($f) => self.walker.$f = parse(k, value)?,)*
                                _ => return Err(HarnessError::Config(format!("unknown key {k}"))),
                            }
                        };
                    }
                    walker_keys!(set_walker);
                } else {
                    return Err(HarnessError::Config(format!("unknown key {k}")));
                }
            }
            _ => return Err(HarnessError::Config(format!("unknown key {k}"))),
        }
        Ok(())
    }

    /// Every key with its current value, sorted. `run.out` is left out so
    /// that where a run is written does not change its identity.
    pub fn entries(&self) -> Vec<(String, String)> {
        let a = &self.agent;
        let OuParams { theta, sigma, dt } = a.noise;
        let mut e: Vec<(String, String)> = vec![
            ("run.algo".into(), a.algo.name().into()),
            ("run.env".into(), self.env.name().into()),
            ("run.seed".into(), self.seed.to_string()),
            ("run.episodes".into(), self.episodes.to_string()),
            ("run.checkpoint_every".into(), self.checkpoint_every.to_string()),
            ("run.summed_reward".into(), self.summed_reward.to_string()),
            ("run.max_updates".into(), self.max_updates.to_string()),
            ("agent.gamma".into(), a.gamma.to_string()),
            ("agent.lr_actor".into(), a.lr_actor.to_string()),
            ("agent.lr_critic".into(), a.lr_critic.to_string()),
            ("agent.batch".into(), a.batch.to_string()),
            ("agent.tau".into(), a.tau.to_string()),
            ("agent.weight_period".into(), a.weight_period.to_string()),
            ("agent.stats_window".into(), a.stats_window.to_string()),
            ("agent.ou_theta".into(), theta.to_string()),
            ("agent.ou_sigma".into(), sigma.to_string()),
            ("agent.ou_dt".into(), dt.to_string()),
            ("agent.actor_hidden".into(), join(&a.actor_hidden)),
            ("agent.critic_branch".into(), a.critic_branch.to_string()),
            ("agent.critic_trunk".into(), a.critic_trunk.to_string()),
            ("agent.replay_capacity".into(), a.replay_capacity.to_string()),
            ("eval.magnitudes".into(), join(&self.eval.magnitudes)),
            ("eval.trials".into(), self.eval.trials.to_string()),
            ("eval.recovery".into(), self.eval.recovery.to_string()),
            ("eval.onset_window".into(), self.eval.onset_window.to_string()),
            ("eval.duration".into(), self.eval.duration.to_string()),
            ("env.grid.max_steps".into(), self.grid_max_steps.to_string()),
        ];
        macro_rules! get_line {
            ($($f:ident),*) => {
                $(e.push((format!("env.line.{}", stringify!($f)), self.line.$f.to_string()));)*
            };
        }
        line_keys!(get_line);
        macro_rules! get_walker {
            ($($f:ident),*) => {
                $(e.push((format!("env.walker.{}", stringify!($f)), self.walker.$f.to_string()));)*
            };
        }
        walker_keys!(get_walker);
        e.sort();
        e
    }

    /// Canonical text: one sorted `section.key=value` per line.
    pub fn canonical(&self) -> String {
        self.entries()
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn parse_str(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !["run", "agent", "env", "eval"].contains(&name) {
                    return Err(HarnessError::Config(format!(
                        "line {}: unknown section [{name}]",
                        n + 1
                    )));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected key = value", n + 1))
            })?;
            let sec = section.as_deref().ok_or_else(|| {
                HarnessError::Config(format!("line {}: key outside of a section", n + 1))
            })?;
            cfg.set(sec, key.trim(), value.trim())
                .map_err(|e| HarnessError::Config(format!("line {}: {}", n + 1, e.message())))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    /// Rebuilds a config from `section.key=value` pairs.
    pub fn from_entries<'a, I>(entries: I) -> Result<Self, HarnessError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut cfg = RunConfig::default();
        for (k, v) in entries {
            let (section, key) = k
                .split_once('.')
                .ok_or_else(|| HarnessError::Config(format!("key without section: {k}")))?;
            cfg.set(section, key, v)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.episodes == 0 {
            return Err(HarnessError::Config("run.episodes must be at least 1".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(HarnessError::Config("run.checkpoint_every must be at least 1".into()));
        }
        if self.grid_max_steps == 0 {
            return Err(HarnessError::Config("env.grid.max_steps must be at least 1".into()));
        }
        self.agent.validate()?;
        self.line.validate()?;
        self.walker.validate()?;
        let e = &self.eval;
        if e.trials == 0 {
            return Err(HarnessError::Config("eval.trials must be at least 1".into()));
        }
        if e.magnitudes.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(HarnessError::Config("eval.magnitudes must be non-negative".into()));
        }
        if !(e.recovery > 0.0 && e.duration > 0.0 && e.onset_window >= 0.0) {
            return Err(HarnessError::Config(
                "eval.recovery and eval.duration must be positive, eval.onset_window non-negative"
                    .into(),
            ));
        }
        Ok(())
    }
}
