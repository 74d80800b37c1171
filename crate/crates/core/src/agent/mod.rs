//! DDPG, MHDDPG and HDPG sharing one actor-critic implementation.
//!
//! The three algorithms differ only in the number of critic heads and in how
//! the per-head policy gradients are weighted:
//!
//! * `ddpg`: one head trained on the sum of normalized components, `m = [1]`.
//! * `mhddpg`: K heads, `m` fixed at all ones.
//! * `hdpg`: K heads, `m` recomputed from windowed reward statistics every
//!   `weight_period` episodes.

mod critic;
mod noise;
mod weights;

use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::nn::checkpoint::Checkpoint;
use crate::nn::{Activation, AdamParams, AdamState, GradientSet, MlpParams, MlpSpec, NnError};
use crate::replay::Transition;

pub use critic::{build_critic, CriticCache, CriticGrads, CriticOptimizer, CriticShape, MultiHeadCritic};
pub use noise::{OuNoise, OuParams};
pub use weights::{
    compute_priority_weights, normalize_reward, update_reward_stats, PriorityWeights,
    RewardNormalizer, RewardStats, RewardWindow,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("invalid agent config: {0}")]
    Config(String),
    #[error("not ready: have {have} samples, need {need}")]
    NotReady { have: usize, need: usize },
    #[error("training diverged: {0}")]
    Diverged(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Ddpg,
    Mhddpg,
    Hdpg,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Ddpg => "ddpg",
            Algo::Mhddpg => "mhddpg",
            Algo::Hdpg => "hdpg",
        }
    }
}

impl FromStr for Algo {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, AgentError> {
        match s {
            "ddpg" => Ok(Algo::Ddpg),
            "mhddpg" => Ok(Algo::Mhddpg),
            "hdpg" => Ok(Algo::Hdpg),
            other => Err(AgentError::Config(format!(
                "unknown algo '{other}' (expected ddpg, mhddpg or hdpg)"
            ))),
        }
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub algo: Algo,
    pub gamma: f64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub batch: usize,
    pub tau: f64,
    /// Episodes between priority-weight refreshes.
    pub weight_period: usize,
    /// Normalized step rewards the statistics are computed over.
    pub stats_window: usize,
    pub noise: OuParams,
    pub actor_hidden: Vec<usize>,
    pub critic_branch: usize,
    pub critic_trunk: usize,
    pub replay_capacity: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Hdpg,
            gamma: 0.99,
            lr_actor: 1e-5,
            lr_critic: 1e-4,
            batch: 64,
            tau: 0.005,
            weight_period: 20,
            stats_window: 2000,
            noise: OuParams::default(),
            actor_hidden: vec![128, 256],
            critic_branch: 128,
            critic_trunk: 256,
            replay_capacity: 1_000_000,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |msg: String| Err(AgentError::Config(msg));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        for (name, lr) in [("lr_actor", self.lr_actor), ("lr_critic", self.lr_critic)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return bad(format!("{name} must be positive, got {lr}"));
            }
        }
        if self.batch == 0 {
            return bad("batch must be at least 1".into());
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.weight_period == 0 {
            return bad("weight_period must be at least 1".into());
        }
        if self.stats_window < 2 {
            return bad(format!("stats_window must be at least 2, got {}", self.stats_window));
        }
        let OuParams { theta, sigma, dt } = self.noise;
        if !(theta >= 0.0 && sigma >= 0.0 && dt > 0.0 && theta.is_finite() && sigma.is_finite() && dt.is_finite()) {
            return bad(format!("invalid noise parameters theta={theta} sigma={sigma} dt={dt}"));
        }
        if self.actor_hidden.iter().any(|&h| h == 0) || self.critic_branch == 0 || self.critic_trunk == 0 {
            return bad("layer widths must be positive".into());
        }
        if self.replay_capacity == 0 {
            return bad("replay_capacity must be positive".into());
        }
        Ok(())
    }
}

pub fn actor_spec(obs_dim: usize, act_dim: usize, hidden: &[usize]) -> MlpSpec {
    let mut sizes = vec![obs_dim];
    sizes.extend_from_slice(hidden);
    sizes.push(act_dim);
    MlpSpec::new(sizes, Activation::Relu, Activation::Tanh)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_grad_norm: f64,
}

/// Actor, multi-head critic, their target copies and optimizer state.
#[derive(Debug, Clone)]
pub struct Agent {
    cfg: AgentConfig,
    normalizer: RewardNormalizer,
    actor: MlpParams,
    target_actor: MlpParams,
    critic: MultiHeadCritic,
    target_critic: MultiHeadCritic,
    actor_opt: AdamState,
    critic_opt: CriticOptimizer,
    weights: PriorityWeights,
    window: RewardWindow,
    updates: u64,
}

fn non_finite(v: &[f64]) -> bool {
    v.iter().any(|x| !x.is_finite())
}

impl Agent {
    /// Builds the networks from `rng` (actor first, then critic).
    ///
    /// `normalizer` carries the environment's K reward components.
    pub fn new<R: Rng + ?Sized>(
        cfg: AgentConfig,
        obs_dim: usize,
        act_dim: usize,
        normalizer: RewardNormalizer,
        rng: &mut R,
    ) -> Result<Self, AgentError> {
        cfg.validate()?;
        let actor = MlpParams::init_with_rng(actor_spec(obs_dim, act_dim, &cfg.actor_hidden), rng)?;
        let heads = match cfg.algo {
            Algo::Ddpg => 1,
            _ => normalizer.k(),
        };
        let critic = build_critic(obs_dim, act_dim, heads, cfg.critic_branch, cfg.critic_trunk, rng)?;
        Ok(Self::assemble(cfg, normalizer, actor.clone(), actor, critic.clone(), critic))
    }

    fn assemble(
        cfg: AgentConfig,
        normalizer: RewardNormalizer,
        actor: MlpParams,
        target_actor: MlpParams,
        critic: MultiHeadCritic,
        target_critic: MultiHeadCritic,
    ) -> Self {
        let heads = critic.heads();
        Self {
            actor_opt: AdamState::new(&actor, AdamParams::default()),
            critic_opt: CriticOptimizer::new(&critic, AdamParams::default()),
            weights: PriorityWeights::ones(heads),
            window: RewardWindow::new(cfg.stats_window),
            updates: 0,
            cfg,
            normalizer,
            actor,
            target_actor,
            critic,
            target_critic,
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn normalizer(&self) -> &RewardNormalizer {
        &self.normalizer
    }

    pub fn actor(&self) -> &MlpParams {
        &self.actor
    }

    pub fn critic(&self) -> &MultiHeadCritic {
        &self.critic
    }

    pub fn target_actor(&self) -> &MlpParams {
        &self.target_actor
    }

    pub fn target_critic(&self) -> &MultiHeadCritic {
        &self.target_critic
    }

    pub fn heads(&self) -> usize {
        self.critic.heads()
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Weights used by the actor update (length = number of heads).
    pub fn weights(&self) -> &PriorityWeights {
        &self.weights
    }

    /// Weights as reported per reward component: the single-head baseline
    /// reports all ones.
    pub fn component_weights(&self) -> Vec<f64> {
        if self.heads() == self.normalizer.k() {
            self.weights.m.clone()
        } else {
            vec![1.0; self.normalizer.k()]
        }
    }

    pub fn set_weights(&mut self, w: PriorityWeights) -> Result<(), AgentError> {
        if w.k() != self.heads() || w.m.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(AgentError::Config(format!(
                "weights {:?} do not fit {} heads",
                w.m,
                self.heads()
            )));
        }
        self.weights = w;
        Ok(())
    }

    /// All online and target parameters, actor first.
    pub fn parameter_vector(&self) -> Vec<f64> {
        self.actor
            .values()
            .chain(self.critic.values())
            .chain(self.target_actor.values())
            .chain(self.target_critic.values())
            .copied()
            .collect()
    }

    /// Deterministic policy output, optionally perturbed by `noise` and
    /// clipped to `[-1, 1]`.
    pub fn select_action<R: Rng + ?Sized>(
        &self,
        state: &[f64],
        noise: Option<(&mut OuNoise, &mut R)>,
    ) -> Result<Vec<f64>, AgentError> {
        let mut a = self.actor.output(state)?;
        if non_finite(&a) {
            return Err(AgentError::Diverged(format!("non-finite actor output {a:?}")));
        }
        if let Some((ou, rng)) = noise {
            for (ai, n) in a.iter_mut().zip(ou.sample(rng)) {
                *ai = (*ai + n).clamp(-1.0, 1.0);
            }
        }
        Ok(a)
    }

    /// Records one raw step reward in the statistics window.
    pub fn observe_reward(&mut self, raw: &[f64]) {
        self.window.push(self.normalizer.normalize(raw));
    }

    /// Called at the start of every episode. Returns true when the priority
    /// weights were recomputed.
    pub fn begin_episode(&mut self, episode: usize) -> bool {
        if self.cfg.algo != Algo::Hdpg
            || episode == 0
            || episode % self.cfg.weight_period != 0
        {
            return false;
        }
        match self.window.stats() {
            Ok(stats) => {
                let w = compute_priority_weights(&stats);
                if w.k() == self.heads() {
                    self.weights = w;
                    true
                } else {
                    false
                }
            }
            Err(_) => false,
        }
    }

    /// Per-head regression rewards for a raw reward vector.
    pub fn head_rewards(&self, raw: &[f64]) -> Vec<f64> {
        let n = self.normalizer.normalize(raw);
        if self.heads() == 1 && n.len() > 1 {
            vec![n.iter().sum()]
        } else {
            n
        }
    }

    /// TD targets `y_k = r_k + gamma (1 - done) Q'_k(s', pi'(s'))`.
    pub fn td_targets(&self, t: &Transition) -> Result<Vec<f64>, AgentError> {
        let mut y = self.head_rewards(&t.reward);
        if !t.done {
            let a_next = self.target_actor.output(&t.next_state)?;
            let q_next = self.target_critic.q_values(&t.next_state, &a_next)?;
            for (yk, qk) in y.iter_mut().zip(q_next) {
                *yk += self.cfg.gamma * qk;
            }
        }
        Ok(y)
    }

    /// Loss and critic gradient of `mean_b sum_k (y_bk - Q_k(s_b, a_b))^2`
    /// without touching the parameters.
    pub fn critic_gradient(&self, batch: &[&Transition]) -> Result<(f64, CriticGrads), AgentError> {
        if batch.is_empty() {
            return Err(AgentError::NotReady { have: 0, need: 1 });
        }
        let scale = 1.0 / batch.len() as f64;
        let mut grads = CriticGrads::zeros_like(&self.critic);
        let mut loss = 0.0;
        for t in batch {
            let y = self.td_targets(t)?;
            let (q, cache) = self.critic.forward(&t.state, &t.action)?;
            let mut dq = Vec::with_capacity(q.len());
            for (qk, yk) in q.iter().zip(&y) {
                let e = qk - yk;
                loss += e * e;
                dq.push(2.0 * e * scale);
            }
            self.critic.backward(&cache, &dq, Some(&mut grads), false)?;
        }
        let loss = loss * scale;
        if !loss.is_finite() {
            return Err(AgentError::Diverged(format!("non-finite critic loss {loss}")));
        }
        Ok((loss, grads))
    }

    pub fn critic_update(&mut self, batch: &[&Transition]) -> Result<f64, AgentError> {
        let (loss, grads) = self.critic_gradient(batch)?;
        self.critic_opt
            .step(&mut self.critic, &grads, self.cfg.lr_critic)
            .map_err(|e| AgentError::Diverged(format!("critic update: {e}")))?;
        Ok(loss)
    }

    /// Gradient of `-mean_b sum_k m_k Q_k(s_b, pi(s_b))` with respect to the
    /// actor parameters.
    pub fn actor_gradient(
        &self,
        batch: &[&Transition],
        weights: &[f64],
    ) -> Result<GradientSet, AgentError> {
        if batch.is_empty() {
            return Err(AgentError::NotReady { have: 0, need: 1 });
        }
        if weights.len() != self.heads() {
            return Err(AgentError::Config(format!(
                "{} weights for {} heads",
                weights.len(),
                self.heads()
            )));
        }
        let scale = 1.0 / batch.len() as f64;
        let dq: Vec<f64> = weights.iter().map(|m| -m * scale).collect();
        let mut grads = GradientSet::zeros_like(&self.actor);
        for t in batch {
            let (a, actor_cache) = self.actor.forward(&t.state)?;
            let (_, critic_cache) = self.critic.forward(&t.state, &a)?;
            let da = self
                .critic
                .backward(&critic_cache, &dq, None, true)?
                .expect("action gradient requested");
            self.actor
                .backward_into(&actor_cache, &da, Some(&mut grads), false)?;
        }
        Ok(grads)
    }

    pub fn actor_update(&mut self, batch: &[&Transition]) -> Result<f64, AgentError> {
        let m = self.weights.m.clone();
        let grads = self.actor_gradient(batch, &m)?;
        let norm = grads.norm();
        self.actor_opt
            .step(&mut self.actor, &grads, self.cfg.lr_actor)
            .map_err(|e| AgentError::Diverged(format!("actor update: {e}")))?;
        Ok(norm)
    }

    /// Critic step, actor step, then soft target updates.
    pub fn update(&mut self, batch: &[&Transition]) -> Result<UpdateStats, AgentError> {
        let critic_loss = self.critic_update(batch)?;
        let actor_grad_norm = self.actor_update(batch)?;
        self.target_critic.soft_update(&self.critic, self.cfg.tau)?;
        self.target_actor.soft_update(&self.actor, self.cfg.tau)?;
        self.updates += 1;
        Ok(UpdateStats {
            critic_loss,
            actor_grad_norm,
        })
    }

    pub fn to_checkpoint(&self, mut manifest: std::collections::BTreeMap<String, String>) -> Checkpoint {
        let s = self.critic.shape();
        manifest.insert("algo".into(), self.cfg.algo.name().into());
        manifest.insert("obs_dim".into(), s.obs_dim.to_string());
        manifest.insert("act_dim".into(), s.act_dim.to_string());
        manifest.insert("heads".into(), s.heads.to_string());
        manifest.insert("k".into(), self.normalizer.k().to_string());
        manifest.insert(
            "actor_layers".into(),
            self.actor
                .spec()
                .layer_sizes
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        manifest.insert("critic_branch".into(), s.branch.to_string());
        manifest.insert("critic_trunk".into(), s.trunk.to_string());
        manifest.insert(
            "weights".into(),
            self.weights
                .m
                .iter()
                .map(|v| format!("{v:?}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        Checkpoint {
            manifest,
            actor: self.actor.layers().to_vec(),
            critic: self.critic.layers(),
            target_actor: self.target_actor.layers().to_vec(),
            target_critic: self.target_critic.layers(),
        }
    }

    /// Restores networks from a checkpoint. Optimizer moments and the
    /// statistics window start fresh; the priority weights are restored.
    pub fn from_checkpoint(
        cfg: AgentConfig,
        normalizer: RewardNormalizer,
        ckpt: &Checkpoint,
    ) -> Result<Self, AgentError> {
        cfg.validate()?;
        let actor_sizes = ckpt
            .actor
            .first()
            .map(|l| l.cols)
            .into_iter()
            .chain(ckpt.actor.iter().map(|l| l.rows))
            .collect::<Vec<_>>();
        let spec = MlpSpec::new(actor_sizes, Activation::Relu, Activation::Tanh);
        let actor = MlpParams::from_layers(spec.clone(), ckpt.actor.clone())
            .map_err(|e| AgentError::Checkpoint(format!("actor: {e}")))?;
        let target_actor = MlpParams::from_layers(spec, ckpt.target_actor.clone())
            .map_err(|e| AgentError::Checkpoint(format!("target actor: {e}")))?;
        let critic = MultiHeadCritic::from_layers(ckpt.critic.clone())
            .map_err(|e| AgentError::Checkpoint(format!("critic: {e}")))?;
        let target_critic = MultiHeadCritic::from_layers(ckpt.target_critic.clone())
            .map_err(|e| AgentError::Checkpoint(format!("target critic: {e}")))?;
        if critic.shape() != target_critic.shape() {
            return Err(AgentError::Checkpoint("critic and target critic differ in shape".into()));
        }
        let s = critic.shape();
        if s.obs_dim != actor.input_dim() || s.act_dim != actor.output_dim() {
            return Err(AgentError::Checkpoint(format!(
                "actor maps {} -> {} but critic expects {} -> {}",
                actor.input_dim(),
                actor.output_dim(),
                s.obs_dim,
                s.act_dim
            )));
        }
        let expected_heads = match cfg.algo {
            Algo::Ddpg => 1,
            _ => normalizer.k(),
        };
        if s.heads != expected_heads {
            return Err(AgentError::Checkpoint(format!(
                "critic has {} heads, {} with K={} needs {}",
                s.heads,
                cfg.algo,
                normalizer.k(),
                expected_heads
            )));
        }
        let mut agent = Self::assemble(cfg, normalizer, actor, target_actor, critic, target_critic);
        if let Some(w) = ckpt.manifest.get("weights") {
            let m = w
                .split(',')
                .map(|v| v.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| AgentError::Checkpoint(format!("weights: {e}")))?;
            agent.set_weights(PriorityWeights { m })?;
        }
        Ok(agent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_cfg(algo: Algo) -> AgentConfig {
        AgentConfig {
            algo,
            actor_hidden: vec![6],
            critic_branch: 5,
            critic_trunk: 7,
            batch: 4,
            stats_window: 4,
            lr_actor: 1e-3,
            lr_critic: 1e-3,
            ..AgentConfig::default()
        }
    }

    fn norm3() -> RewardNormalizer {
        RewardNormalizer::new(vec![(-1.0, 1.0), (-2.0, 0.0), (0.0, 4.0)]).unwrap()
    }

    fn agent(algo: Algo, seed: u64) -> Agent {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Agent::new(small_cfg(algo), 6, 2, norm3(), &mut rng).unwrap()
    }

    fn batch(seed: u64, n: usize, done: bool) -> Vec<Transition> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = |k| (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        (0..n)
            .map(|_| Transition {
                state: v(6),
                action: v(2),
                reward: v(3),
                next_state: v(6),
                done,
            })
            .collect()
    }

    #[test]
    fn ddpg_has_one_head() {
        assert_eq!(agent(Algo::Ddpg, 0).heads(), 1);
        assert_eq!(agent(Algo::Hdpg, 0).heads(), 3);
        assert_eq!(agent(Algo::Ddpg, 0).component_weights(), vec![1.0; 3]);
    }

    #[test]
    fn zero_discount_targets_are_normalized_rewards() {
        let mut cfg = small_cfg(Algo::Mhddpg);
        cfg.gamma = f64::MIN_POSITIVE;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = Agent::new(cfg, 6, 2, norm3(), &mut rng).unwrap();
        for t in batch(1, 5, true) {
            assert_eq!(a.td_targets(&t).unwrap(), a.normalizer().normalize(&t.reward));
        }
        // A terminal transition never bootstraps, whatever gamma is.
        let a = agent(Algo::Hdpg, 0);
        for t in batch(2, 5, true) {
            assert_eq!(a.td_targets(&t).unwrap(), a.normalizer().normalize(&t.reward));
        }
    }

    #[test]
    fn ddpg_target_sums_normalized_components() {
        let a = agent(Algo::Ddpg, 0);
        let t = &batch(3, 1, true)[0];
        let n = a.normalizer().normalize(&t.reward);
        assert_eq!(a.td_targets(t).unwrap(), vec![n.iter().sum::<f64>()]);
    }

    #[test]
    fn actor_gradient_is_linear_in_weights() {
        let a = agent(Algo::Hdpg, 4);
        let b = batch(5, 8, false);
        let refs: Vec<&Transition> = b.iter().collect();
        let g1 = a.actor_gradient(&refs, &[0.3, 1.1, 1.6]).unwrap();
        let g2 = a.actor_gradient(&refs, &[0.6, 2.2, 3.2]).unwrap();
        for (x, y) in g1.values().zip(g2.values()) {
            assert!((2.0 * x - y).abs() <= 1e-12 * y.abs().max(1e-12));
        }
        let ga = a.actor_gradient(&refs, &[1.0, 0.0, 0.0]).unwrap();
        let gb = a.actor_gradient(&refs, &[0.0, 1.0, 0.0]).unwrap();
        let gc = a.actor_gradient(&refs, &[0.0, 0.0, 1.0]).unwrap();
        let gs = a.actor_gradient(&refs, &[1.0, 1.0, 1.0]).unwrap();
        for (((x, y), z), s) in ga.values().zip(gb.values()).zip(gc.values()).zip(gs.values()) {
            assert!((x + y + z - s).abs() <= 1e-12 * s.abs().max(1e-9));
        }
    }

    #[test]
    fn critic_loss_decreases_on_fixed_batch() {
        let mut a = agent(Algo::Mhddpg, 6);
        let b = batch(7, 16, true);
        let refs: Vec<&Transition> = b.iter().collect();
        let first = a.critic_update(&refs).unwrap();
        let mut last = first;
        for _ in 0..300 {
            last = a.critic_update(&refs).unwrap();
        }
        assert!(last < 0.5 * first, "{first} -> {last}");
    }

    #[test]
    fn weights_refresh_only_on_period() {
        let mut a = agent(Algo::Hdpg, 0);
        assert!(!a.begin_episode(20));
        for r in [[1.0, 0.0, 0.0], [0.0, -1.0, 2.0], [1.0, 0.0, 4.0], [-1.0, -2.0, 0.0]] {
            a.observe_reward(&r);
        }
        assert!(!a.begin_episode(0));
        assert!(!a.begin_episode(21));
        assert!(a.begin_episode(40));
        let s: f64 = a.weights().m.iter().sum();
        assert!((s - 3.0).abs() < 1e-12);
        let mut m = agent(Algo::Mhddpg, 0);
        for _ in 0..4 {
            m.observe_reward(&[1.0, 0.0, 0.0]);
        }
        assert!(!m.begin_episode(20));
        assert_eq!(m.weights().m, vec![1.0; 3]);
    }

    #[test]
    fn select_action_paths() {
        let a = agent(Algo::Hdpg, 8);
        let s = vec![0.1; 6];
        let plain = a.select_action::<ChaCha8Rng>(&s, None).unwrap();
        assert_eq!(plain, a.actor().output(&s).unwrap());
        let mut ou = OuNoise::with_state(
            vec![5.0, -5.0],
            OuParams {
                sigma: 0.0,
                ..OuParams::default()
            },
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let noisy = a.select_action(&s, Some((&mut ou, &mut rng))).unwrap();
        assert_eq!(noisy, vec![1.0, -1.0]);
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut a = agent(Algo::Hdpg, 9);
        a.set_weights(PriorityWeights { m: vec![0.9, 1.2, 0.9] }).unwrap();
        let ck = a.to_checkpoint(Default::default());
        let bytes = ck.encode();
        let back = Checkpoint::decode(&bytes).unwrap();
        let b = Agent::from_checkpoint(small_cfg(Algo::Hdpg), norm3(), &back).unwrap();
        assert_eq!(a.parameter_vector(), b.parameter_vector());
        assert_eq!(a.weights(), b.weights());
        assert!(Agent::from_checkpoint(small_cfg(Algo::Ddpg), norm3(), &back).is_err());
    }
}
