//! Reward normalization, windowed reward statistics and priority weights.

use std::collections::VecDeque;

use super::AgentError;

/// Per-component affine map onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardNormalizer {
    bounds: Vec<(f64, f64)>,
}

impl RewardNormalizer {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self, AgentError> {
        if bounds.is_empty() {
            return Err(AgentError::Config("reward normalizer needs at least one component".into()));
        }
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(AgentError::Config(format!(
                    "reward component {k} has invalid bounds ({lo}, {hi})"
                )));
            }
        }
        Ok(Self { bounds })
    }

    pub fn k(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn normalize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.bounds)
            .map(|(&r, &(lo, hi))| ((r - lo) / (hi - lo)).clamp(0.0, 1.0))
            .collect()
    }
}

pub fn normalize_reward(raw: &[f64], norm: &RewardNormalizer) -> Vec<f64> {
    norm.normalize(raw)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardStats {
    pub mean: Vec<f64>,
    /// Population variance.
    pub variance: Vec<f64>,
}

/// Mean and population variance per component over a window of
/// normalized rewards.
pub fn update_reward_stats<'a, I>(window: I) -> Result<RewardStats, AgentError>
where
    I: IntoIterator<Item = &'a [f64]>,
    I::IntoIter: Clone,
{
    let it = window.into_iter();
    let n = it.clone().count();
    if n < 2 {
        return Err(AgentError::NotReady { have: n, need: 2 });
    }
    let k = it.clone().next().map_or(0, <[f64]>::len);
    let mut mean = vec![0.0; k];
    for r in it.clone() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut variance = vec![0.0; k];
    for r in it {
        for ((s, v), m) in variance.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    variance.iter_mut().for_each(|s| *s /= n as f64);
    Ok(RewardStats { mean, variance })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorityWeights {
    pub m: Vec<f64>,
}

impl PriorityWeights {
    pub fn ones(k: usize) -> Self {
        Self { m: vec![1.0; k] }
    }

    pub fn k(&self) -> usize {
        self.m.len()
    }
}

/// `m_k = K (mu_k + exp(var_k)) / sum_j (mu_j + exp(var_j))`.
pub fn compute_priority_weights(stats: &RewardStats) -> PriorityWeights {
    let k = stats.mean.len() as f64;
    let x: Vec<f64> = stats
        .mean
        .iter()
        .zip(&stats.variance)
        .map(|(mu, var)| mu + var.exp())
        .collect();
    let total: f64 = x.iter().sum();
    PriorityWeights {
        m: x.iter().map(|xi| k * xi / total).collect(),
    }
}

/// The last `capacity` normalized step rewards.
#[derive(Debug, Clone)]
pub struct RewardWindow {
    capacity: usize,
    samples: VecDeque<Vec<f64>>,
}

impl RewardWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            samples: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, normalized: Vec<f64>) {
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(normalized);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.samples.len() == self.capacity
    }

    pub fn stats(&self) -> Result<RewardStats, AgentError> {
        if !self.is_full() {
            return Err(AgentError::NotReady {
                have: self.samples.len(),
                need: self.capacity,
            });
        }
        update_reward_stats(self.samples.iter().map(Vec::as_slice))
    }
}
