//! Ornstein-Uhlenbeck exploration noise.

use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuParams {
    pub theta: f64,
    pub sigma: f64,
    pub dt: f64,
}

impl Default for OuParams {
    fn default() -> Self {
        Self {
            theta: 0.15,
            sigma: 0.2,
            dt: 1.0,
        }
    }
}

/// Mean-reverting noise around zero, one independent process per action
/// dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct OuNoise {
    pub params: OuParams,
    x: Vec<f64>,
}

impl OuNoise {
    pub fn new(dim: usize, params: OuParams) -> Self {
        Self {
            params,
            x: vec![0.0; dim],
        }
    }

    pub fn with_state(x: Vec<f64>, params: OuParams) -> Self {
        Self { params, x }
    }

    pub fn reset(&mut self) {
        self.x.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    /// `x <- x - theta x dt + sigma sqrt(dt) xi` and returns the new `x`.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &[f64] {
        let OuParams { theta, sigma, dt } = self.params;
        let scale = sigma * dt.sqrt();
        for v in &mut self.x {
            let xi: f64 = rng.sample(StandardNormal);
            *v += theta * (0.0 - *v) * dt + scale * xi;
        }
        &self.x
    }
}
