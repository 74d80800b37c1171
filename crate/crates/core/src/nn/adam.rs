use super::{GradientSet, MlpParams, NnError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Bias-corrected first/second moment accumulators for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub params: AdamParams,
    m: GradientSet,
    v: GradientSet,
    step: u64,
}

impl AdamState {
    pub fn new(net: &MlpParams, params: AdamParams) -> Self {
        Self {
            params,
            m: GradientSet::zeros_like(net),
            v: GradientSet::zeros_like(net),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &GradientSet {
        &self.m
    }

    pub fn second_moment(&self) -> &GradientSet {
        &self.v
    }

    /// One descent step `p <- p - lr * m_hat / (sqrt(v_hat) + eps)`.
    ///
    /// The gradient is validated before anything is mutated.
    pub fn step(&mut self, net: &mut MlpParams, grads: &GradientSet, lr: f64) -> Result<()> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(NnError::InvalidLearningRate(lr));
        }
        let congruent = grads.layers.len() == net.layers.len()
            && self.m.layers.len() == net.layers.len()
            && grads
                .layers
                .iter()
                .zip(&net.layers)
                .zip(&self.m.layers)
                .all(|((g, p), m)| g.same_shape(p) && m.same_shape(p));
        if !congruent {
            return Err(NnError::Shape(
                "adam: gradient, state and parameters are not congruent".into(),
            ));
        }
        if let Some(layer) = grads.first_non_finite_layer() {
            return Err(NnError::NonFiniteGradient { layer });
        }

        self.step += 1;
        let AdamParams { beta1, beta2, eps } = self.params;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);

        let layers = net
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(self.m.layers.iter_mut().zip(self.v.layers.iter_mut()));
        for ((p, g), (m, v)) in layers {
            let p_vals = p.weights.iter_mut().chain(p.bias.iter_mut());
            let g_vals = g.weights.iter().chain(g.bias.iter());
            let m_vals = m.weights.iter_mut().chain(m.bias.iter_mut());
            let v_vals = v.weights.iter_mut().chain(v.bias.iter_mut());
            for (((p, &g), m), v) in p_vals.zip(g_vals).zip(m_vals).zip(v_vals) {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Free-function form of [`AdamState::step`].
pub fn adam_step(
    net: &mut MlpParams,
    grads: &GradientSet,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    state.step(net, grads, lr)
}
