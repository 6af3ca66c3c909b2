//! Discriminator between randomized-environment and reference-environment
//! behaviour, and the sampler reward derived from it.
//!
//! The network emits a logit; `p(randomized | s, a, s') = σ(logit)`. A
//! trajectory scores `mean_t log clamp(p_t, 1e-6, 1 − 1e-6)`, so rollouts
//! that are easy to tell apart from reference behaviour earn more.

use std::path::Path;

use rand::seq::index;
use rand::Rng;

use crate::envs::Transition;
use crate::error::{AdrError, Result};
use crate::nn::{load_net, save_net, sigmoid, Activation, AdamState, Init, Matrix, Mlp};

pub const PROB_FLOOR: f64 = 1e-6;
pub const PROB_CEIL: f64 = 1.0 - 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    Randomized,
    Reference,
}

/// `(s, a, s')` rows of one trajectory plus the scored flag that guards
/// training order.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledTrajectory {
    pub label: Label,
    pub tuples: Matrix,
    scored: bool,
}

impl LabeledTrajectory {
    pub fn from_transitions(label: Label, traj: &[Transition]) -> Result<Self> {
        if traj.is_empty() {
            return Err(AdrError::EmptyTrajectory);
        }
        let rows: Vec<Vec<f64>> = traj
            .iter()
            .map(|t| {
                let mut row = Vec::with_capacity(2 * t.s.len() + t.a.len());
                row.extend_from_slice(&t.s);
                row.extend_from_slice(&t.a);
                row.extend_from_slice(&t.s_next);
                row
            })
            .collect();
        Ok(Self {
            label,
            tuples: Matrix::from_rows(&rows)?,
            scored: false,
        })
    }

    pub fn from_tuples(label: Label, tuples: Matrix) -> Result<Self> {
        if tuples.rows() == 0 {
            return Err(AdrError::EmptyTrajectory);
        }
        Ok(Self {
            label,
            tuples,
            scored: false,
        })
    }

    pub fn is_scored(&self) -> bool {
        self.scored
    }

    pub fn len(&self) -> usize {
        self.tuples.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.rows() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discriminator {
    pub net: Mlp,
    opt: AdamState,
    pub batch_size: usize,
}

impl Discriminator {
    pub fn new<R: Rng + ?Sized>(
        tuple_dim: usize,
        hidden: &[usize],
        lr: f64,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut sizes = vec![tuple_dim];
        sizes.extend(hidden);
        sizes.push(1);
        let net = Mlp::new(&sizes, Activation::Tanh, Activation::Identity, Init::UniformFanIn, rng)?;
        Ok(Self {
            net,
            opt: AdamState::new(lr),
            batch_size,
        })
    }

    /// Default shape: two hidden layers of 128, lr 2e-4, batch 128.
    pub fn for_env<R: Rng + ?Sized>(obs_dim: usize, act_dim: usize, rng: &mut R) -> Result<Self> {
        Self::new(2 * obs_dim + act_dim, &[128, 128], 2e-4, 128, rng)
    }

    pub fn tuple_dim(&self) -> usize {
        self.net.input_dim()
    }

    /// Clamped `p(randomized)` per row.
    pub fn probabilities(&self, tuples: &Matrix) -> Result<Vec<f64>> {
        let logits = self.net.predict(tuples)?;
        Ok(logits
            .data()
            .iter()
            .map(|z| sigmoid(*z).clamp(PROB_FLOOR, PROB_CEIL))
            .collect())
    }

    /// Reward from per-tuple probabilities: mean of clamped log-probabilities.
    pub fn reward_from_probabilities(probs: &[f64]) -> Result<f64> {
        if probs.is_empty() {
            return Err(AdrError::EmptyTrajectory);
        }
        Ok(probs
            .iter()
            .map(|p| p.clamp(PROB_FLOOR, PROB_CEIL).ln())
            .sum::<f64>()
            / probs.len() as f64)
    }

    /// Score a trajectory and mark it as eligible for training.
    pub fn score(&self, traj: &mut LabeledTrajectory) -> Result<f64> {
        let r = Self::reward_from_probabilities(&self.probabilities(&traj.tuples)?)?;
        traj.scored = true;
        Ok(r)
    }

    /// Score raw transitions without keeping them.
    pub fn score_trajectory(&self, traj: &[Transition]) -> Result<f64> {
        let mut lt = LabeledTrajectory::from_transitions(Label::Randomized, traj)?;
        self.score(&mut lt)
    }

    /// One balanced minibatch BCE step (randomized = 1, reference = 0).
    /// Every randomized trajectory must have been scored first.
    pub fn train_step<R: Rng + ?Sized>(
        &mut self,
        randomized: &[LabeledTrajectory],
        reference: &[LabeledTrajectory],
        rng: &mut R,
    ) -> Result<f64> {
        if let Some(i) = randomized.iter().position(|t| !t.scored) {
            return Err(AdrError::Contract(format!(
                "randomized trajectory {i} is used for discriminator training before it was scored"
            )));
        }
        let pos = stack(randomized, Label::Randomized)?;
        let neg = stack(reference, Label::Reference)?;
        let half = (self.batch_size / 2).max(1);
        let pos = pick_rows(&pos, half, rng)?;
        let neg = pick_rows(&neg, half, rng)?;
        let mut rows: Vec<&[f64]> = Vec::with_capacity(2 * half);
        let mut labels = Vec::with_capacity(2 * half);
        for r in 0..pos.rows() {
            rows.push(pos.row_slice(r));
            labels.push(1.0);
        }
        for r in 0..neg.rows() {
            rows.push(neg.row_slice(r));
            labels.push(0.0);
        }
        let x = Matrix::from_rows(&rows)?;
        self.bce_step(&x, &labels)
    }

    /// BCE-with-logits step on explicit rows and labels.
    pub fn bce_step(&mut self, x: &Matrix, labels: &[f64]) -> Result<f64> {
        let logits = self.net.forward(x)?;
        let n = labels.len() as f64;
        let mut loss = 0.0;
        let dz: Vec<f64> = logits
            .data()
            .iter()
            .zip(labels)
            .map(|(&z, &y)| {
                loss += softplus(z) - y * z;
                (sigmoid(z) - y) / n
            })
            .collect();
        let grads = self.net.backward(&Matrix::from_vec(labels.len(), 1, dz)?)?;
        self.opt.step(self.net.params_mut(), &grads.as_list())?;
        Ok(loss / n)
    }

    /// Mean BCE loss without training.
    pub fn loss(&self, x: &Matrix, labels: &[f64]) -> Result<f64> {
        let logits = self.net.predict(x)?;
        Ok(logits
            .data()
            .iter()
            .zip(labels)
            .map(|(&z, &y)| softplus(z) - y * z)
            .sum::<f64>()
            / labels.len() as f64)
    }

    /// Fraction of tuples classified correctly at threshold 0.5.
    pub fn accuracy(&self, randomized: &Matrix, reference: &Matrix) -> Result<f64> {
        let p = self.probabilities(randomized)?;
        let q = self.probabilities(reference)?;
        let correct = p.iter().filter(|&&x| x > 0.5).count() + q.iter().filter(|&&x| x <= 0.5).count();
        Ok(correct as f64 / (p.len() + q.len()) as f64)
    }

    /// Single nn checkpoint including the optimizer state.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_net(path, &self.net, Some(&self.opt))
    }

    pub fn load(path: impl AsRef<Path>, batch_size: usize) -> Result<Self> {
        let path = path.as_ref();
        let (net, opt) = load_net(path)?;
        if net.output_dim() != 1 || net.output_activation() != Activation::Identity {
            return Err(AdrError::Checkpoint {
                path: path.to_path_buf(),
                field: "layer_sizes".into(),
                reason: "discriminator must end in a single logit".into(),
            });
        }
        Ok(Self {
            net,
            opt: opt.unwrap_or_else(|| AdamState::new(2e-4)),
            batch_size,
        })
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn stack(trajs: &[LabeledTrajectory], label: Label) -> Result<Matrix> {
    if trajs.is_empty() {
        return Err(AdrError::EmptyTrajectory);
    }
    if let Some(t) = trajs.iter().find(|t| t.label != label) {
        return Err(AdrError::Contract(format!(
            "expected {label:?} trajectories, found {:?}",
            t.label
        )));
    }
    let rows: Vec<&[f64]> = trajs
        .iter()
        .flat_map(|t| (0..t.tuples.rows()).map(move |r| t.tuples.row_slice(r)))
        .collect();
    Matrix::from_rows(&rows)
}

/// `k` distinct rows when available, otherwise `k` rows with replacement.
fn pick_rows<R: Rng + ?Sized>(m: &Matrix, k: usize, rng: &mut R) -> Result<Matrix> {
    let idx: Vec<usize> = if m.rows() >= k {
        index::sample(rng, m.rows(), k).into_vec()
    } else {
        (0..k).map(|_| rng.gen_range(0..m.rows())).collect()
    };
    let rows: Vec<&[f64]> = idx.iter().map(|&i| m.row_slice(i)).collect();
    Matrix::from_rows(&rows)
}
