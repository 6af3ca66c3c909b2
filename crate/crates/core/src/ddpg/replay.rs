use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::Transition;
use crate::error::{AdrError, Result};
use crate::nn::Matrix;

/// Which environment a transition came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Randomized,
    Reference,
}

/// A sampled minibatch, one row per transition.
#[derive(Clone, Debug)]
pub struct Batch {
    pub obs: Matrix,
    pub actions: Matrix,
    pub rewards: Vec<f64>,
    pub next_obs: Matrix,
    /// 1.0 where the transition ended in a true terminal state.
    pub terminal: Vec<f64>,
}

/// Fixed-capacity ring buffer stored as flat arrays.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    obs_dim: usize,
    act_dim: usize,
    capacity: usize,
    len: usize,
    next: usize,
    obs: Vec<f64>,
    actions: Vec<f64>,
    rewards: Vec<f64>,
    next_obs: Vec<f64>,
    terminal: Vec<bool>,
    sources: Vec<Source>,
}

impl ReplayBuffer {
    pub fn new(obs_dim: usize, act_dim: usize, capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            obs_dim,
            act_dim,
            capacity,
            len: 0,
            next: 0,
            obs: Vec::new(),
            actions: Vec::new(),
            rewards: Vec::new(),
            next_obs: Vec::new(),
            terminal: Vec::new(),
            sources: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: &Transition, source: Source) -> Result<()> {
        if t.s.len() != self.obs_dim || t.s_next.len() != self.obs_dim {
            return Err(AdrError::Dimension {
                what: "replay observation".into(),
                expected: self.obs_dim,
                found: t.s.len(),
            });
        }
        if t.a.len() != self.act_dim {
            return Err(AdrError::Dimension {
                what: "replay action".into(),
                expected: self.act_dim,
                found: t.a.len(),
            });
        }
        if self.len < self.capacity {
            self.obs.extend_from_slice(&t.s);
            self.actions.extend_from_slice(&t.a);
            self.rewards.push(t.r);
            self.next_obs.extend_from_slice(&t.s_next);
            self.terminal.push(t.terminal);
            self.sources.push(source);
            self.len += 1;
        } else {
            let i = self.next;
            let (o, a) = (self.obs_dim, self.act_dim);
            self.obs[i * o..(i + 1) * o].copy_from_slice(&t.s);
            self.actions[i * a..(i + 1) * a].copy_from_slice(&t.a);
            self.rewards[i] = t.r;
            self.next_obs[i * o..(i + 1) * o].copy_from_slice(&t.s_next);
            self.terminal[i] = t.terminal;
            self.sources[i] = source;
        }
        self.next = (self.next + 1) % self.capacity;
        Ok(())
    }

    pub fn count_source(&self, source: Source) -> usize {
        self.sources.iter().filter(|&&s| s == source).count()
    }

    /// Uniform sample of `size` distinct transitions.
    pub fn sample<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Result<Batch> {
        if size == 0 || size > self.len {
            return Err(AdrError::Config(format!(
                "cannot sample {size} transitions from a buffer of {}",
                self.len
            )));
        }
        let idx = index::sample(rng, self.len, size);
        let (o, a) = (self.obs_dim, self.act_dim);
        let mut obs = Vec::with_capacity(size * o);
        let mut actions = Vec::with_capacity(size * a);
        let mut rewards = Vec::with_capacity(size);
        let mut next_obs = Vec::with_capacity(size * o);
        let mut terminal = Vec::with_capacity(size);
        for i in idx.iter() {
            obs.extend_from_slice(&self.obs[i * o..(i + 1) * o]);
            actions.extend_from_slice(&self.actions[i * a..(i + 1) * a]);
            rewards.push(self.rewards[i]);
            next_obs.extend_from_slice(&self.next_obs[i * o..(i + 1) * o]);
            terminal.push(if self.terminal[i] { 1.0 } else { 0.0 });
        }
        Ok(Batch {
            obs: Matrix::from_vec(size, o, obs)?,
            actions: Matrix::from_vec(size, a, actions)?,
            rewards,
            next_obs: Matrix::from_vec(size, o, next_obs)?,
            terminal,
        })
    }
}
