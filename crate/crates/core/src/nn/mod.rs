//! Dense feed-forward networks with exact reverse-mode gradients.
//!
//! Weights are stored row-major with `rows = out_dim` and `cols = in_dim`, so a
//! layer computes `y = act(W x + b)`. Everything is `f64`.

mod adam;
pub mod checkpoint;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use adam::{adam_step, AdamParams, AdamState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite gradient entry in layer {layer}")]
    NonFiniteGradient { layer: usize },
    #[error("learning rate must be positive and finite, got {0}")]
    InvalidLearningRate(f64),
    #[error("soft update rate must lie in (0, 1], got {0}")]
    InvalidTau(f64),
}

pub type Result<T> = std::result::Result<T, NnError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Linear,
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Linear => x,
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the pre- and post-activation values.
    #[inline]
    fn derivative(self, pre: f64, post: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - post * post,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = NnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Activation::Linear),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(NnError::InvalidSpec(format!("unknown activation '{other}'"))),
        }
    }
}

/// Network topology: layer widths (input first) and activations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>, hidden: Activation, output: Activation) -> Self {
        Self {
            layer_sizes,
            hidden_activation: hidden,
            output_activation: output,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(NnError::InvalidSpec(format!(
                "need at least 2 layer sizes, got {}",
                self.layer_sizes.len()
            )));
        }
        if let Some(pos) = self.layer_sizes.iter().position(|&n| n == 0) {
            return Err(NnError::InvalidSpec(format!(
                "layer size at position {pos} is zero in {:?}",
                self.layer_sizes
            )));
        }
        Ok(())
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len().saturating_sub(1)
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.num_layers() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }
}

/// One affine layer (or a gradient of the same shape).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    #[inline]
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.cols + col]
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    fn same_shape(&self, other: &DenseLayer) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.weights.len() == other.weights.len()
            && self.bias.len() == other.bias.len()
    }

    fn is_consistent(&self) -> bool {
        self.weights.len() == self.rows * self.cols && self.bias.len() == self.rows
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(self.bias.iter())
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.bias.iter_mut())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Activations recorded by [`MlpParams::forward`] for a later backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn input(&self) -> &[f64] {
        &self.input
    }

    pub fn pre_activations(&self) -> &[Vec<f64>] {
        &self.pre
    }

    pub fn post_activations(&self) -> &[Vec<f64>] {
        &self.post
    }

    pub fn output(&self) -> &[f64] {
        self.post.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Gradients with the same layout as an [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<DenseLayer>,
}

impl GradientSet {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| DenseLayer::zeros(l.rows, l.cols))
                .collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.layers.iter_mut().flat_map(DenseLayer::values_mut) {
            *v *= factor;
        }
    }

    pub fn fill_zero(&mut self) {
        for v in self.layers.iter_mut().flat_map(DenseLayer::values_mut) {
            *v = 0.0;
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.values().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(DenseLayer::values)
    }

    /// Index of the first layer holding a non-finite entry.
    pub fn first_non_finite_layer(&self) -> Option<usize> {
        self.layers
            .iter()
            .position(|l| l.values().any(|v| !v.is_finite()))
    }
}

/// Parameters of a dense network together with its topology.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    spec: MlpSpec,
    layers: Vec<DenseLayer>,
}

impl MlpParams {
    /// Uniform fan-in initialisation: `w ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, zero biases.
    pub fn init(spec: MlpSpec, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::init_with_rng(spec, &mut rng)
    }

    pub fn init_with_rng<R: Rng + ?Sized>(spec: MlpSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let layers = spec
            .layer_sizes
            .windows(2)
            .map(|w| {
                let (cols, rows) = (w[0], w[1]);
                let bound = 1.0 / (cols as f64).sqrt();
                let weights = (0..rows * cols)
                    .map(|_| rng.gen_range(-bound..=bound))
                    .collect();
                DenseLayer {
                    rows,
                    cols,
                    weights,
                    bias: vec![0.0; rows],
                }
            })
            .collect();
        Ok(Self { spec, layers })
    }

    /// Builds parameters from explicit layers, checking them against `spec`.
    pub fn from_layers(spec: MlpSpec, layers: Vec<DenseLayer>) -> Result<Self> {
        spec.validate()?;
        if layers.len() != spec.num_layers() {
            return Err(NnError::Shape(format!(
                "spec has {} layers, got {}",
                spec.num_layers(),
                layers.len()
            )));
        }
        for (i, (layer, w)) in layers.iter().zip(spec.layer_sizes.windows(2)).enumerate() {
            if !layer.is_consistent() || layer.cols != w[0] || layer.rows != w[1] {
                return Err(NnError::Shape(format!(
                    "layer {i}: expected {}x{}, got {}x{} ({} weights, {} biases)",
                    w[1],
                    w[0],
                    layer.rows,
                    layer.cols,
                    layer.weights.len(),
                    layer.bias.len()
                )));
            }
        }
        Ok(Self { spec, layers })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn into_layers(self) -> Vec<DenseLayer> {
        self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.spec.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.spec.layer_sizes.last().expect("validated spec")
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    /// All parameters in layer order, weights before biases.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(DenseLayer::values)
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(DenseLayer::values_mut)
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(NnError::Dimension {
                what: "network input",
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        Ok(())
    }

    /// Evaluates the network without recording a cache.
    pub fn output(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut x = input.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let act = self.spec.activation(i);
            x = (0..layer.rows)
                .map(|r| {
                    let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                    act.apply(layer.bias[r] + dot(row, &x))
                })
                .collect();
        }
        Ok(x)
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        self.check_input(input)?;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let act = self.spec.activation(i);
            let x = if i == 0 { input } else { &post[i - 1] };
            let z: Vec<f64> = (0..layer.rows)
                .map(|r| {
                    let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                    layer.bias[r] + dot(row, x)
                })
                .collect();
            let a = z.iter().map(|&v| act.apply(v)).collect();
            pre.push(z);
            post.push(a);
        }
        let out = post.last().cloned().unwrap_or_default();
        Ok((
            out,
            ForwardCache {
                input: input.to_vec(),
                pre,
                post,
            },
        ))
    }

    /// Reverse-mode gradients of `<output_grad, output>` with respect to every
    /// parameter and to the input.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        output_grad: &[f64],
    ) -> Result<(GradientSet, Vec<f64>)> {
        let mut grads = GradientSet::zeros_like(self);
        let input_grad = self
            .backward_into(cache, output_grad, Some(&mut grads), true)?
            .expect("input gradient requested");
        Ok((grads, input_grad))
    }

    /// Accumulating backward pass.
    ///
    /// Parameter gradients are *added* into `grads` when given; the input
    /// gradient is only computed when `want_input` is set.
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        output_grad: &[f64],
        mut grads: Option<&mut GradientSet>,
        want_input: bool,
    ) -> Result<Option<Vec<f64>>> {
        if cache.pre.len() != self.layers.len() || cache.input.len() != self.input_dim() {
            return Err(NnError::Shape(
                "forward cache does not belong to this network".into(),
            ));
        }
        if output_grad.len() != self.output_dim() {
            return Err(NnError::Dimension {
                what: "output gradient",
                expected: self.output_dim(),
                got: output_grad.len(),
            });
        }
        if let Some(g) = grads.as_deref() {
            let congruent = g.layers.len() == self.layers.len()
                && g.layers.iter().zip(&self.layers).all(|(a, b)| a.same_shape(b));
            if !congruent {
                return Err(NnError::Shape(
                    "gradient set is not congruent with parameters".into(),
                ));
            }
        }

        let mut upstream = output_grad.to_vec();
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let act = self.spec.activation(i);
            let delta: Vec<f64> = upstream
                .iter()
                .zip(cache.pre[i].iter().zip(&cache.post[i]))
                .map(|(g, (&z, &a))| g * act.derivative(z, a))
                .collect();
            let x = if i == 0 { &cache.input } else { &cache.post[i - 1] };

            if let Some(g) = grads.as_deref_mut() {
                let gl = &mut g.layers[i];
                for (r, &d) in delta.iter().enumerate() {
                    if d != 0.0 {
                        axpy(d, x, &mut gl.weights[r * layer.cols..(r + 1) * layer.cols]);
                    }
                    gl.bias[r] += d;
                }
            }

            if i == 0 && !want_input {
                return Ok(None);
            }
            let mut down = vec![0.0; layer.cols];
            for (r, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    axpy(d, &layer.weights[r * layer.cols..(r + 1) * layer.cols], &mut down);
                }
            }
            upstream = down;
        }
        Ok(Some(upstream))
    }

    /// `self <- tau * online + (1 - tau) * self`, elementwise.
    pub fn soft_update(&mut self, online: &MlpParams, tau: f64) -> Result<()> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(NnError::InvalidTau(tau));
        }
        let congruent = self.layers.len() == online.layers.len()
            && self
                .layers
                .iter()
                .zip(&online.layers)
                .all(|(a, b)| a.same_shape(b));
        if !congruent {
            return Err(NnError::Shape(
                "soft update between differently shaped networks".into(),
            ));
        }
        if tau == 1.0 {
            for (t, o) in self.values_mut().zip(online.values()) {
                *t = *o;
            }
        } else {
            let keep = 1.0 - tau;
            for (t, o) in self.values_mut().zip(online.values()) {
                *t = tau * o + keep * *t;
            }
        }
        Ok(())
    }
}

/// Free-function form of [`MlpParams::soft_update`].
pub fn soft_update(target: &mut MlpParams, online: &MlpParams, tau: f64) -> Result<()> {
    target.soft_update(online, tau)
}
