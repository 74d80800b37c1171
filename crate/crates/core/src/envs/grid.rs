//! Small tabular MDP with vector rewards and exposed tables.
//!
//! As an [`Environment`] it presents a one-hot observation and a single
//! continuous action in `[-1, 1]` that is binned onto the discrete actions.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EnvError, EnvSpec, Environment, RewardComponent, StepResult};

pub const MAX_STATES: usize = 50;
pub const MAX_ACTIONS: usize = 5;
pub const MAX_COMPONENTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n_states: usize,
    pub n_actions: usize,
    /// `transitions[s][a][s']`, each row a distribution.
    pub transitions: Vec<Vec<Vec<f64>>>,
    /// `rewards[s][a][k]`, expected reward for taking `a` in `s`.
    pub rewards: Vec<Vec<Vec<f64>>>,
    /// Absorbing, zero-value states that end an episode.
    pub terminal: Vec<bool>,
    pub start: usize,
    pub component_names: Vec<String>,
    pub max_steps: usize,
}

impl GridSpec {
    pub fn k(&self) -> usize {
        self.component_names.len()
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: String| Err(EnvError::InvalidTable(m));
        let (ns, na, k) = (self.n_states, self.n_actions, self.k());
        if ns == 0 || ns > MAX_STATES {
            return bad(format!("{ns} states (allowed 1..={MAX_STATES})"));
        }
        if na == 0 || na > MAX_ACTIONS {
            return bad(format!("{na} actions (allowed 1..={MAX_ACTIONS})"));
        }
        if k == 0 || k > MAX_COMPONENTS {
            return bad(format!("{k} reward components (allowed 1..={MAX_COMPONENTS})"));
        }
        if self.start >= ns || self.terminal.len() != ns || self.max_steps == 0 {
            return bad("start state, terminal flags or step cap malformed".into());
        }
        if self.transitions.len() != ns || self.rewards.len() != ns {
            return bad("table row count differs from state count".into());
        }
        for s in 0..ns {
            if self.transitions[s].len() != na || self.rewards[s].len() != na {
                return bad(format!("state {s}: action count differs"));
            }
            for a in 0..na {
                let row = &self.transitions[s][a];
                if row.len() != ns || row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return bad(format!("P({s},{a},.) malformed"));
                }
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad(format!("P({s},{a},.) sums to {total}"));
                }
                let r = &self.rewards[s][a];
                if r.len() != k || r.iter().any(|v| !v.is_finite()) {
                    return bad(format!("r({s},{a}) malformed"));
                }
            }
        }
        Ok(())
    }
}

/// Per-head action values `q[k][s][a]` of a fixed policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyValues {
    pub q: Vec<Vec<Vec<f64>>>,
    pub iterations: usize,
}

impl PolicyValues {
    /// `sum_k q[k][s][a]`.
    pub fn total(&self) -> Vec<Vec<f64>> {
        let mut out = self.q[0].clone();
        for head in &self.q[1..] {
            for (row, hrow) in out.iter_mut().zip(head) {
                for (v, h) in row.iter_mut().zip(hrow) {
                    *v += h;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct GridMdp {
    grid: GridSpec,
    spec: EnvSpec,
    state: usize,
    steps: usize,
    rng: ChaCha8Rng,
}

impl GridMdp {
    pub fn new(grid: GridSpec) -> Result<Self, EnvError> {
        grid.validate()?;
        let components = (0..grid.k())
            .map(|k| {
                let vals = grid.rewards.iter().flatten().map(|r| r[k]);
                let lo = vals.clone().fold(f64::INFINITY, f64::min);
                let hi = vals.fold(f64::NEG_INFINITY, f64::max);
                let hi = if hi > lo { hi } else { lo + 1.0 };
                RewardComponent::new(&grid.component_names[k], lo, hi)
            })
            .collect();
        let spec = EnvSpec {
            name: "grid".into(),
            obs_dim: grid.n_states,
            act_dim: 1,
            action_low: vec![-1.0],
            action_high: vec![1.0],
            components,
            control_dt: 1.0,
            max_steps: grid.max_steps,
        };
        let start = grid.start;
        Ok(Self {
            grid,
            spec,
            state: start,
            steps: 0,
            rng: ChaCha8Rng::seed_from_u64(0),
        })
    }

    /// 3x3 slippery gridworld: goal in one corner, hazard in the centre.
    ///
    /// Actions: up, down, left, right, stay. A move succeeds with
    /// probability 0.8 and otherwise leaves the agent in place. Rewards are
    /// `goal` (+1 for entering the goal), `step` (-0.04 per move) and
    /// `hazard` (-0.5 for entering the centre cell).
    pub fn gridworld() -> Self {
        const W: usize = 3;
        let ns = W * W;
        let goal = ns - 1;
        let hazard = 4;
        let moves: [(i64, i64); 5] = [(0, -1), (0, 1), (-1, 0), (1, 0), (0, 0)];
        let mut transitions = vec![vec![vec![0.0; ns]; 5]; ns];
        let mut rewards = vec![vec![vec![0.0; 3]; 5]; ns];
        for s in 0..ns {
            let (x, y) = ((s % W) as i64, (s / W) as i64);
            for (a, (dx, dy)) in moves.iter().enumerate() {
                let (nx, ny) = (x + dx, y + dy);
                let target = if (0..W as i64).contains(&nx) && (0..W as i64).contains(&ny) {
                    ny as usize * W + nx as usize
                } else {
                    s
                };
                if s == goal {
                    transitions[s][a][s] = 1.0;
                    continue;
                }
                transitions[s][a][target] += 0.8;
                transitions[s][a][s] += 0.2;
                let p_move = if target == s { 0.0 } else { 0.8 };
                rewards[s][a][0] = if target == goal { p_move } else { 0.0 };
                rewards[s][a][1] = -0.04;
                rewards[s][a][2] = if target == hazard { -0.5 * p_move } else { 0.0 };
            }
        }
        let mut terminal = vec![false; ns];
        terminal[goal] = true;
        Self::new(GridSpec {
            n_states: ns,
            n_actions: 5,
            transitions,
            rewards,
            terminal,
            start: 0,
            component_names: vec!["goal".into(), "step".into(), "hazard".into()],
            max_steps: 50,
        })
        .expect("built-in gridworld is well formed")
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn transition_table(&self) -> &[Vec<Vec<f64>>] {
        &self.grid.transitions
    }

    pub fn reward_table(&self) -> &[Vec<Vec<f64>>] {
        &self.grid.rewards
    }

    pub fn state(&self) -> usize {
        self.state
    }

    /// Bins a policy action in `[-1, 1]` onto a discrete action index.
    pub fn action_index(&self, u: f64) -> usize {
        let n = self.grid.n_actions;
        let idx = ((u.clamp(-1.0, 1.0) + 1.0) * 0.5 * n as f64).floor() as usize;
        idx.min(n - 1)
    }

    /// Iterative per-head policy evaluation under a stochastic policy
    /// `policy[s][a]`, sweeping until the largest change falls below `tol`.
    pub fn evaluate_policy(
        &self,
        policy: &[Vec<f64>],
        gamma: f64,
        tol: f64,
        max_iters: usize,
    ) -> Result<PolicyValues, EnvError> {
        let g = &self.grid;
        if policy.len() != g.n_states || policy.iter().any(|p| p.len() != g.n_actions) {
            return Err(EnvError::InvalidTable("policy shape mismatch".into()));
        }
        let mut q = vec![vec![vec![0.0; g.n_actions]; g.n_states]; g.k()];
        for it in 1..=max_iters {
            let mut delta: f64 = 0.0;
            for (k, head) in q.iter_mut().enumerate() {
                let v: Vec<f64> = (0..g.n_states)
                    .map(|s| {
                        if g.terminal[s] {
                            0.0
                        } else {
                            policy[s].iter().zip(&head[s]).map(|(p, q)| p * q).sum()
                        }
                    })
                    .collect();
                for s in 0..g.n_states {
                    if g.terminal[s] {
                        continue;
                    }
                    for a in 0..g.n_actions {
                        let next: f64 = g.transitions[s][a]
                            .iter()
                            .zip(&v)
                            .map(|(p, v)| p * v)
                            .sum();
                        let new = g.rewards[s][a][k] + gamma * next;
                        delta = delta.max((new - head[s][a]).abs());
                        head[s][a] = new;
                    }
                }
            }
            if delta < tol {
                return Ok(PolicyValues { q, iterations: it });
            }
        }
        Err(EnvError::InvalidTable(format!(
            "policy evaluation did not converge in {max_iters} sweeps"
        )))
    }

    fn observe(&self) -> Vec<f64> {
        let mut o = vec![0.0; self.grid.n_states];
        o[self.state] = 1.0;
        o
    }

    /// Takes a discrete action directly.
    pub fn step_discrete(&mut self, a: usize) -> StepResult {
        let s = self.state;
        let reward = self.grid.rewards[s][a].clone();
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        let mut next = s;
        for (sp, &p) in self.grid.transitions[s][a].iter().enumerate() {
            acc += p;
            if p > 0.0 {
                next = sp;
            }
            if u < acc {
                break;
            }
        }
        self.state = next;
        self.steps += 1;
        let done = self.grid.terminal[next];
        let mut info = BTreeMap::new();
        info.insert("state", next as f64);
        info.insert("action", a as f64);
        StepResult {
            obs: self.observe(),
            reward,
            done,
            truncated: !done && self.steps >= self.grid.max_steps,
            info,
        }
    }
}

impl Environment for GridMdp {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.state = self.grid.start;
        self.steps = 0;
        self.observe()
    }

    fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        self.spec.check_action(action)?;
        let a = self.action_index(action[0]);
        Ok(self.step_discrete(a))
    }
}
