//! Deterministic environments emitting vector-valued rewards.

mod grid;
mod line;
mod push;
mod summed;
pub mod walker;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::agent::RewardNormalizer;

pub use grid::{GridMdp, GridSpec, PolicyValues};
pub use line::{LineConfig, LineWalker};
pub use push::{apply_push, PushDirection, PushDisturbance, PushEvent};
pub use summed::SummedReward;
pub use walker::{PlanarWalker, WalkerConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("action has length {got}, environment expects {expected}")]
    ActionDim { expected: usize, got: usize },
    #[error("non-finite action component {index}")]
    NonFiniteAction { index: usize },
    #[error("simulation diverged: {0}")]
    Diverged(String),
    #[error("invalid transition table: {0}")]
    InvalidTable(String),
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
}

/// One reward component and the range used to normalize it.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardComponent {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl RewardComponent {
    pub fn new(name: &str, min: f64, max: f64) -> Self {
        Self {
            name: name.to_string(),
            min,
            max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: String,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    pub components: Vec<RewardComponent>,
    pub control_dt: f64,
    pub max_steps: usize,
}

impl EnvSpec {
    /// Number of reward components.
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn reward_names(&self) -> Vec<&str> {
        self.components.iter().map(|c| c.name.as_str()).collect()
    }

    /// Maps a policy action in `[-1, 1]^n` affinely onto the action box.
    pub fn scale_action(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(self.action_low.iter().zip(&self.action_high))
            .map(|(&u, (&lo, &hi))| lo + (u.clamp(-1.0, 1.0) + 1.0) * 0.5 * (hi - lo))
            .collect()
    }

    /// Inverse of [`EnvSpec::scale_action`].
    pub fn unscale_action(&self, action: &[f64]) -> Vec<f64> {
        action
            .iter()
            .zip(self.action_low.iter().zip(&self.action_high))
            .map(|(&a, (&lo, &hi))| 2.0 * (a - lo) / (hi - lo) - 1.0)
            .collect()
    }

    pub(crate) fn check_action(&self, action: &[f64]) -> Result<(), EnvError> {
        if action.len() != self.act_dim {
            return Err(EnvError::ActionDim {
                expected: self.act_dim,
                got: action.len(),
            });
        }
        if let Some(index) = action.iter().position(|a| !a.is_finite()) {
            return Err(EnvError::NonFiniteAction { index });
        }
        Ok(())
    }
}

/// Normalization bounds declared by an environment.
pub fn reward_bounds(spec: &EnvSpec) -> RewardNormalizer {
    RewardNormalizer::new(spec.components.iter().map(|c| (c.min, c.max)).collect())
        .expect("environment declared invalid reward bounds")
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub obs: Vec<f64>,
    /// Raw reward components.
    pub reward: Vec<f64>,
    /// A terminal predicate fired; no bootstrapping past this step.
    pub done: bool,
    /// The episode hit its step cap without terminating.
    pub truncated: bool,
    pub info: BTreeMap<&'static str, f64>,
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode. Identical seeds give identical episodes.
    fn reset(&mut self, seed: u64) -> Vec<f64>;

    fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError>;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn spec(&self) -> &EnvSpec {
        (**self).spec()
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        (**self).reset(seed)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        (**self).step(action)
    }
}
