//! Experience replay over vector-reward transitions and observation stacking.

use rand::Rng;
use thiserror::Error;

/// Number of consecutive observations fed to the actor and critic.
pub const STACK_DEPTH: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReplayError {
    #[error("transition {field} has length {got}, buffer expects {expected}")]
    Shape {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("transition contains a non-finite {0}")]
    NonFinite(&'static str),
    #[error("buffer holds {len} transitions, batch of {batch} not ready")]
    NotReady { len: usize, batch: usize },
    #[error("replay capacity must be positive")]
    ZeroCapacity,
    #[error("observation has length {got}, frame stack expects {expected}")]
    ObsDim { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    /// Raw, un-normalized reward components.
    pub reward: Vec<f64>,
    pub next_state: Vec<f64>,
    pub done: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionDims {
    pub state: usize,
    pub action: usize,
    pub reward: usize,
}

/// Fixed-capacity FIFO ring of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    dims: TransitionDims,
    capacity: usize,
    storage: Vec<Transition>,
    /// Slot the next push overwrites once full.
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, dims: TransitionDims) -> Result<Self, ReplayError> {
        if capacity == 0 {
            return Err(ReplayError::ZeroCapacity);
        }
        Ok(Self {
            dims,
            capacity,
            storage: Vec::new(),
            cursor: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dims(&self) -> TransitionDims {
        self.dims
    }

    fn validate(&self, t: &Transition) -> Result<(), ReplayError> {
        let checks = [
            ("state", self.dims.state, &t.state),
            ("action", self.dims.action, &t.action),
            ("reward", self.dims.reward, &t.reward),
            ("next_state", self.dims.state, &t.next_state),
        ];
        for (field, expected, v) in checks {
            if v.len() != expected {
                return Err(ReplayError::Shape {
                    field,
                    expected,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ReplayError::NonFinite(field));
            }
        }
        Ok(())
    }

    pub fn push(&mut self, t: Transition) -> Result<(), ReplayError> {
        self.validate(&t)?;
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.cursor] = t;
            self.cursor = (self.cursor + 1) % self.capacity;
        }
        Ok(())
    }

    /// Contents from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let (newer, older) = self.storage.split_at(self.cursor);
        older.iter().chain(newer.iter())
    }

    /// Uniform sampling with replacement.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        batch: usize,
        rng: &mut R,
    ) -> Result<Vec<&Transition>, ReplayError> {
        if batch == 0 || self.storage.len() < batch {
            return Err(ReplayError::NotReady {
                len: self.storage.len(),
                batch,
            });
        }
        let n = self.storage.len();
        Ok((0..batch).map(|_| &self.storage[rng.gen_range(0..n)]).collect())
    }
}

/// Rolling window of the last three observations.
#[derive(Debug, Clone)]
pub struct FrameStack {
    obs_dim: usize,
    history: Vec<Vec<f64>>,
}

impl FrameStack {
    pub fn new(obs_dim: usize) -> Self {
        Self {
            obs_dim,
            history: Vec::with_capacity(STACK_DEPTH),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn stacked_dim(&self) -> usize {
        STACK_DEPTH * self.obs_dim
    }

    fn check(&self, obs: &[f64]) -> Result<(), ReplayError> {
        if obs.len() != self.obs_dim {
            return Err(ReplayError::ObsDim {
                expected: self.obs_dim,
                got: obs.len(),
            });
        }
        Ok(())
    }

    /// Starts an episode: the first observation fills every slot.
    pub fn reset(&mut self, first: &[f64]) -> Result<Vec<f64>, ReplayError> {
        self.check(first)?;
        self.history.clear();
        self.history
            .extend(std::iter::repeat(first.to_vec()).take(STACK_DEPTH));
        Ok(self.stacked())
    }

    /// Appends an observation and returns `[s_{t-2}, s_{t-1}, s_t]`.
    pub fn push(&mut self, obs: &[f64]) -> Result<Vec<f64>, ReplayError> {
        if self.history.is_empty() {
            return self.reset(obs);
        }
        self.check(obs)?;
        self.history.remove(0);
        self.history.push(obs.to_vec());
        Ok(self.stacked())
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.history.concat()
    }
}
