//! One-dimensional force-controlled point mass.
//!
//! Rewards: `progress` (distance moved this step), `effort` (force penalty)
//! and `alive` (per-step bonus, minus the crash penalty when the speed limit
//! is exceeded).

use std::collections::BTreeMap;

use super::{EnvError, EnvSpec, Environment, RewardComponent, StepResult};

#[derive(Debug, Clone, PartialEq)]
pub struct LineConfig {
    pub dt: f64,
    pub drag: f64,
    pub v_max: f64,
    pub max_steps: usize,
    pub effort_weight: f64,
    pub alive_bonus: f64,
    pub crash_penalty: f64,
}

impl Default for LineConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            drag: 0.1,
            v_max: 3.0,
            max_steps: 400,
            effort_weight: 0.1,
            alive_bonus: 0.05,
            crash_penalty: 5.0,
        }
    }
}

impl LineConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let positive = [
            ("dt", self.dt),
            ("v_max", self.v_max),
            ("effort_weight", self.effort_weight),
            ("alive_bonus", self.alive_bonus),
            ("crash_penalty", self.crash_penalty),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(EnvError::InvalidConfig(format!(
                    "line.{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.drag >= 0.0) || self.max_steps == 0 {
            return Err(EnvError::InvalidConfig(
                "line.drag must be non-negative and line.max_steps positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LineWalker {
    cfg: LineConfig,
    spec: EnvSpec,
    x: f64,
    v: f64,
    last_force: f64,
    steps: usize,
}

impl LineWalker {
    pub fn new(cfg: LineConfig) -> Result<Self, EnvError> {
        cfg.validate()?;
        let step_max = cfg.v_max * cfg.dt;
        let spec = EnvSpec {
            name: "line".into(),
            obs_dim: 3,
            act_dim: 1,
            action_low: vec![-1.0],
            action_high: vec![1.0],
            components: vec![
                RewardComponent::new("progress", -step_max, step_max),
                RewardComponent::new("effort", -cfg.effort_weight, 0.0),
                RewardComponent::new(
                    "alive",
                    cfg.alive_bonus - cfg.crash_penalty,
                    cfg.alive_bonus,
                ),
            ],
            control_dt: cfg.dt,
            max_steps: cfg.max_steps,
        };
        Ok(Self {
            cfg,
            spec,
            x: 0.0,
            v: 0.0,
            last_force: 0.0,
            steps: 0,
        })
    }

    pub fn position(&self) -> f64 {
        self.x
    }

    pub fn velocity(&self) -> f64 {
        self.v
    }

    fn observe(&self) -> Vec<f64> {
        vec![
            self.v / self.cfg.v_max,
            self.last_force,
            self.steps as f64 / self.cfg.max_steps as f64,
        ]
    }
}

impl Environment for LineWalker {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _seed: u64) -> Vec<f64> {
        self.x = 0.0;
        self.v = 0.0;
        self.last_force = 0.0;
        self.steps = 0;
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        self.spec.check_action(action)?;
        let force = action[0].clamp(-1.0, 1.0);
        let dt = self.cfg.dt;

        let x_prev = self.x;
        self.x += self.v * dt;
        self.v += (force - self.cfg.drag * self.v) * dt;
        self.last_force = force;
        self.steps += 1;

        let crashed = self.v.abs() > self.cfg.v_max;
        let mut alive = self.cfg.alive_bonus;
        if crashed {
            alive -= self.cfg.crash_penalty;
        }
        let reward = vec![
            self.x - x_prev,
            -self.cfg.effort_weight * force.abs(),
            alive,
        ];
        let mut info = BTreeMap::new();
        info.insert("distance", self.x);
        info.insert("velocity", self.v);
        Ok(StepResult {
            obs: self.observe(),
            reward,
            done: crashed,
            truncated: !crashed && self.steps >= self.cfg.max_steps,
            info,
        })
    }
}
