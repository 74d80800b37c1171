//! Transient horizontal pushes on the walker's pelvis.

use rand::Rng;

use super::walker::PushSchedule;
use super::{EnvError, EnvSpec, Environment, PlanarWalker, StepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushDirection {
    Forward,
    Backward,
}

impl PushDirection {
    pub fn sign(self) -> f64 {
        match self {
            PushDirection::Forward => 1.0,
            PushDirection::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushEvent {
    /// Newtons.
    pub magnitude: f64,
    /// Seconds.
    pub duration: f64,
    pub direction: PushDirection,
    /// Seconds after reset.
    pub onset: f64,
}

impl PushEvent {
    pub fn validate(&self) -> Result<(), EnvError> {
        if !(self.magnitude >= 0.0 && self.magnitude.is_finite()) {
            return Err(EnvError::InvalidConfig(format!(
                "push magnitude must be non-negative, got {}",
                self.magnitude
            )));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(EnvError::InvalidConfig(format!(
                "push duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.onset >= 0.0 && self.onset.is_finite()) {
            return Err(EnvError::InvalidConfig(format!(
                "push onset must be non-negative, got {}",
                self.onset
            )));
        }
        Ok(())
    }

    /// Onset uniform in `[0, onset_window)`, direction a fair coin.
    pub fn random<R: Rng + ?Sized>(
        magnitude: f64,
        duration: f64,
        onset_window: f64,
        rng: &mut R,
    ) -> Self {
        let onset = if onset_window > 0.0 {
            rng.gen_range(0.0..onset_window)
        } else {
            0.0
        };
        let direction = if rng.gen_bool(0.5) {
            PushDirection::Forward
        } else {
            PushDirection::Backward
        };
        Self {
            magnitude,
            duration,
            direction,
            onset,
        }
    }

    pub(crate) fn schedule(&self, dt_phys: f64) -> PushSchedule {
        PushSchedule {
            start: (self.onset / dt_phys).round() as u64,
            len: (self.duration / dt_phys).round() as u64,
            force: self.magnitude * self.direction.sign(),
        }
    }
}

/// A walker that receives one push per episode.
#[derive(Debug, Clone)]
pub struct PushDisturbance {
    inner: PlanarWalker,
    event: PushEvent,
}

pub fn apply_push(mut env: PlanarWalker, event: PushEvent) -> Result<PushDisturbance, EnvError> {
    event.validate()?;
    env.set_push(Some(event.schedule(env.config().dt_phys)));
    Ok(PushDisturbance { inner: env, event })
}

impl PushDisturbance {
    pub fn event(&self) -> &PushEvent {
        &self.event
    }

    pub fn inner(&self) -> &PlanarWalker {
        &self.inner
    }

    pub fn into_inner(mut self) -> PlanarWalker {
        self.inner.set_push(None);
        self.inner
    }
}

impl Environment for PushDisturbance {
    fn spec(&self) -> &EnvSpec {
        self.inner.spec()
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let obs = self.inner.reset(seed);
        self.inner
            .set_push(Some(self.event.schedule(self.inner.config().dt_phys)));
        obs
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        self.inner.step(action)
    }
}
