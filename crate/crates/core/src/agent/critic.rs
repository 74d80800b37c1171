//! Two-branch critic with a shared trunk and one linear output per head.
//!
//! ```text
//! state  -> dense(branch) relu --\
//!                                 concat -> dense(trunk) relu -> dense(K)
//! action -> dense(branch) relu --/
//! ```

use rand::Rng;

use crate::nn::{
    Activation, AdamParams, AdamState, DenseLayer, ForwardCache, GradientSet, MlpParams, MlpSpec,
    NnError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CriticShape {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub branch: usize,
    pub trunk: usize,
    pub heads: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiHeadCritic {
    shape: CriticShape,
    state_branch: MlpParams,
    action_branch: MlpParams,
    /// Trunk layer followed by the head layer.
    trunk: MlpParams,
}

pub struct CriticCache {
    state: ForwardCache,
    action: ForwardCache,
    trunk: ForwardCache,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticGrads {
    pub state_branch: GradientSet,
    pub action_branch: GradientSet,
    pub trunk: GradientSet,
}

impl CriticGrads {
    pub fn zeros_like(c: &MultiHeadCritic) -> Self {
        Self {
            state_branch: GradientSet::zeros_like(&c.state_branch),
            action_branch: GradientSet::zeros_like(&c.action_branch),
            trunk: GradientSet::zeros_like(&c.trunk),
        }
    }

    pub fn scale(&mut self, f: f64) {
        self.state_branch.scale(f);
        self.action_branch.scale(f);
        self.trunk.scale(f);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticOptimizer {
    state_branch: AdamState,
    action_branch: AdamState,
    trunk: AdamState,
}

impl CriticOptimizer {
    pub fn new(c: &MultiHeadCritic, params: AdamParams) -> Self {
        Self {
            state_branch: AdamState::new(&c.state_branch, params),
            action_branch: AdamState::new(&c.action_branch, params),
            trunk: AdamState::new(&c.trunk, params),
        }
    }

    pub fn step(
        &mut self,
        c: &mut MultiHeadCritic,
        g: &CriticGrads,
        lr: f64,
    ) -> Result<(), NnError> {
        // Validate every part first so a failure leaves the critic untouched.
        for gs in [&g.state_branch, &g.action_branch, &g.trunk] {
            if let Some(layer) = gs.first_non_finite_layer() {
                return Err(NnError::NonFiniteGradient { layer });
            }
        }
        self.state_branch.step(&mut c.state_branch, &g.state_branch, lr)?;
        self.action_branch.step(&mut c.action_branch, &g.action_branch, lr)?;
        self.trunk.step(&mut c.trunk, &g.trunk, lr)
    }
}

fn branch_spec(input: usize, width: usize) -> MlpSpec {
    MlpSpec::new(vec![input, width], Activation::Relu, Activation::Relu)
}

fn trunk_spec(shape: &CriticShape) -> MlpSpec {
    MlpSpec::new(
        vec![2 * shape.branch, shape.trunk, shape.heads],
        Activation::Relu,
        Activation::Linear,
    )
}

impl MultiHeadCritic {
    pub fn init<R: Rng + ?Sized>(shape: CriticShape, rng: &mut R) -> Result<Self, NnError> {
        Ok(Self {
            state_branch: MlpParams::init_with_rng(branch_spec(shape.obs_dim, shape.branch), rng)?,
            action_branch: MlpParams::init_with_rng(branch_spec(shape.act_dim, shape.branch), rng)?,
            trunk: MlpParams::init_with_rng(trunk_spec(&shape), rng)?,
            shape,
        })
    }

    /// Layers in serialization order: state branch, action branch, trunk,
    /// heads.
    pub fn layers(&self) -> Vec<DenseLayer> {
        self.state_branch
            .layers()
            .iter()
            .chain(self.action_branch.layers())
            .chain(self.trunk.layers())
            .cloned()
            .collect()
    }

    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self, NnError> {
        if layers.len() != 4 {
            return Err(NnError::Shape(format!(
                "critic needs 4 layers, got {}",
                layers.len()
            )));
        }
        let shape = CriticShape {
            obs_dim: layers[0].cols,
            act_dim: layers[1].cols,
            branch: layers[0].rows,
            trunk: layers[2].rows,
            heads: layers[3].rows,
        };
        if layers[1].rows != shape.branch
            || layers[2].cols != 2 * shape.branch
            || layers[3].cols != shape.trunk
        {
            return Err(NnError::Shape("critic layers do not chain".into()));
        }
        let mut it = layers.into_iter();
        let s = it.next().unwrap();
        let a = it.next().unwrap();
        let rest: Vec<DenseLayer> = it.collect();
        Ok(Self {
            state_branch: MlpParams::from_layers(branch_spec(shape.obs_dim, shape.branch), vec![s])?,
            action_branch: MlpParams::from_layers(branch_spec(shape.act_dim, shape.branch), vec![a])?,
            trunk: MlpParams::from_layers(trunk_spec(&shape), rest)?,
            shape,
        })
    }

    pub fn shape(&self) -> CriticShape {
        self.shape
    }

    pub fn heads(&self) -> usize {
        self.shape.heads
    }

    pub fn head_layer(&self) -> &DenseLayer {
        &self.trunk.layers()[1]
    }

    pub fn param_count(&self) -> usize {
        self.state_branch.param_count() + self.action_branch.param_count() + self.trunk.param_count()
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.state_branch
            .values()
            .chain(self.action_branch.values())
            .chain(self.trunk.values())
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.state_branch
            .values_mut()
            .chain(self.action_branch.values_mut())
            .chain(self.trunk.values_mut())
    }

    /// Per-head values `[Q_1 .. Q_K]`.
    pub fn q_values(&self, state: &[f64], action: &[f64]) -> Result<Vec<f64>, NnError> {
        let mut h = self.state_branch.output(state)?;
        h.extend(self.action_branch.output(action)?);
        self.trunk.output(&h)
    }

    pub fn forward(&self, state: &[f64], action: &[f64]) -> Result<(Vec<f64>, CriticCache), NnError> {
        let (hs, cs) = self.state_branch.forward(state)?;
        let (ha, ca) = self.action_branch.forward(action)?;
        let mut h = hs;
        h.extend(ha);
        let (q, ct) = self.trunk.forward(&h)?;
        Ok((
            q,
            CriticCache {
                state: cs,
                action: ca,
                trunk: ct,
            },
        ))
    }

    /// Accumulates parameter gradients of `<q_grad, Q>` into `grads` (when
    /// given) and returns the gradient with respect to the action (when
    /// requested).
    pub fn backward(
        &self,
        cache: &CriticCache,
        q_grad: &[f64],
        grads: Option<&mut CriticGrads>,
        want_action: bool,
    ) -> Result<Option<Vec<f64>>, NnError> {
        let b = self.shape.branch;
        match grads {
            Some(g) => {
                let dh = self
                    .trunk
                    .backward_into(&cache.trunk, q_grad, Some(&mut g.trunk), true)?
                    .expect("input gradient requested");
                self.state_branch
                    .backward_into(&cache.state, &dh[..b], Some(&mut g.state_branch), false)?;
                self.action_branch.backward_into(
                    &cache.action,
                    &dh[b..],
                    Some(&mut g.action_branch),
                    want_action,
                )
            }
            None => {
                if !want_action {
                    return Ok(None);
                }
                let dh = self
                    .trunk
                    .backward_into(&cache.trunk, q_grad, None, true)?
                    .expect("input gradient requested");
                self.action_branch
                    .backward_into(&cache.action, &dh[b..], None, true)
            }
        }
    }

    pub fn soft_update(&mut self, online: &MultiHeadCritic, tau: f64) -> Result<(), NnError> {
        self.state_branch.soft_update(&online.state_branch, tau)?;
        self.action_branch.soft_update(&online.action_branch, tau)?;
        self.trunk.soft_update(&online.trunk, tau)
    }
}

/// Critic for stacked observations of `obs_dim` and actions of `act_dim`.
pub fn build_critic<R: Rng + ?Sized>(
    obs_dim: usize,
    act_dim: usize,
    heads: usize,
    branch: usize,
    trunk: usize,
    rng: &mut R,
) -> Result<MultiHeadCritic, NnError> {
    MultiHeadCritic::init(
        CriticShape {
            obs_dim,
            act_dim,
            branch,
            trunk,
            heads,
        },
        rng,
    )
}
