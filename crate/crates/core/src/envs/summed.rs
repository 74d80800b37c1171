//! Collapses a vector reward into a single component.

use super::{EnvError, EnvSpec, Environment, RewardComponent, StepResult};

/// Wraps an environment so it reports `sum_k r_k` as its only reward
/// component, with bounds `(sum_k min_k, sum_k max_k)`.
#[derive(Debug, Clone)]
pub struct SummedReward<E> {
    inner: E,
    spec: EnvSpec,
}

impl<E: Environment> SummedReward<E> {
    pub fn new(inner: E) -> Self {
        let mut spec = inner.spec().clone();
        let min = spec.components.iter().map(|c| c.min).sum();
        let max = spec.components.iter().map(|c| c.max).sum();
        spec.components = vec![RewardComponent::new("total", min, max)];
        Self { inner, spec }
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }
}

impl<E: Environment> Environment for SummedReward<E> {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.inner.reset(seed)
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        let mut r = self.inner.step(action)?;
        r.reward = vec![r.reward.iter().sum()];
        Ok(r)
    }
}
