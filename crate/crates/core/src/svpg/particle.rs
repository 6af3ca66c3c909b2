//! One sampling particle: a Gaussian actor over configuration steps and a
//! state-value critic, trained with an n-step advantage actor-critic.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{AdrError, Result};
use crate::nn::{Activation, AdamState, Gradients, Init, Matrix, Mlp};
use crate::space::{RandConfig, RandSpace};

use super::SvpgConfig;

/// One proposal made by a particle.
#[derive(Clone, Debug, PartialEq)]
pub struct ProposalStep {
    pub state: RandConfig,
    /// Raw Gaussian sample before clipping.
    pub action: Vec<f64>,
    pub proposal: RandConfig,
    pub reward: Option<f64>,
    /// The particle was reset right after this proposal.
    pub terminal: bool,
}

#[derive(Clone, Debug)]
pub struct Particle {
    pub actor: Mlp,
    pub critic: Mlp,
    pub log_std: Vec<f64>,
    pub state: RandConfig,
    pub steps_since_reset: usize,
    pub rollout: Vec<ProposalStep>,
    pub(crate) critic_opt: AdamState,
}

impl PartialEq for Particle {
    fn eq(&self, other: &Self) -> bool {
        self.actor == other.actor
            && self.critic == other.critic
            && self.log_std == other.log_std
            && self.state == other.state
            && self.steps_since_reset == other.steps_since_reset
            && self.rollout == other.rollout
    }
}

/// Policy-gradient estimate for one particle.
#[derive(Clone, Debug)]
pub struct A2cGrads {
    /// Ascent direction on `[actor params…, log_std…]`.
    pub policy: Vec<f64>,
    /// Descent gradient of the value-regression loss.
    pub critic: Gradients,
    pub returns: Vec<f64>,
    pub advantages: Vec<f64>,
}

impl Particle {
    pub fn new<R: Rng + ?Sized>(space: &RandSpace, cfg: &SvpgConfig, rng: &mut R) -> Result<Self> {
        let d = space.len();
        let init = Init::Orthogonal {
            hidden_gain: 1.0,
            output_gain: cfg.output_gain,
        };
        let mut sizes = vec![d];
        sizes.extend(&cfg.hidden);
        sizes.push(d);
        let actor = Mlp::new(&sizes, Activation::Tanh, Activation::Identity, init, rng)?;
        *sizes.last_mut().unwrap() = 1;
        let critic = Mlp::new(
            &sizes,
            Activation::Tanh,
            Activation::Identity,
            Init::Orthogonal {
                hidden_gain: 1.0,
                output_gain: 1.0,
            },
            rng,
        )?;
        Ok(Self {
            actor,
            critic,
            log_std: vec![cfg.log_std_init; d],
            state: space.sample_uniform(rng),
            steps_since_reset: 0,
            rollout: Vec::new(),
            critic_opt: AdamState::new(cfg.lr),
        })
    }

    pub fn dim(&self) -> usize {
        self.log_std.len()
    }

    /// `φ`: actor parameters followed by the log standard deviations.
    pub fn flat_policy(&self) -> Vec<f64> {
        let mut p = self.actor.flat_params();
        p.extend_from_slice(&self.log_std);
        p
    }

    pub fn set_flat_policy(&mut self, phi: &[f64], cfg: &SvpgConfig) -> Result<()> {
        let n = self.actor.num_params();
        if phi.len() != n + self.dim() {
            return Err(AdrError::Dimension {
                what: "particle parameter vector".into(),
                expected: n + self.dim(),
                found: phi.len(),
            });
        }
        self.actor.set_flat_params(&phi[..n])?;
        for (ls, v) in self.log_std.iter_mut().zip(&phi[n..]) {
            *ls = v.clamp(cfg.log_std_min, cfg.log_std_max);
        }
        Ok(())
    }

    pub fn mean(&self, state: &RandConfig) -> Vec<f64> {
        self.actor
            .predict(&Matrix::row(state.values()))
            .expect("particle state matches actor input")
            .into_data()
    }

    pub fn value(&self, state: &RandConfig) -> f64 {
        self.critic
            .predict(&Matrix::row(state.values()))
            .expect("particle state matches critic input")
            .data()[0]
    }

    /// Sample a step, move, and reset the state after `horizon` proposals.
    pub fn propose<R: Rng + ?Sized>(
        &mut self,
        space: &RandSpace,
        cfg: &SvpgConfig,
        rng: &mut R,
    ) -> Result<RandConfig> {
        let mu = self.mean(&self.state);
        let action: Vec<f64> = mu
            .iter()
            .zip(&self.log_std)
            .map(|(m, ls)| {
                let z: f64 = StandardNormal.sample(rng);
                m + ls.exp() * z
            })
            .collect();
        let proposal = self.state.clamp_step(&action, cfg.max_step)?;
        self.steps_since_reset += 1;
        let terminal = self.steps_since_reset >= cfg.horizon;
        self.rollout.push(ProposalStep {
            state: self.state.clone(),
            action,
            proposal: proposal.clone(),
            reward: None,
            terminal,
        });
        if terminal {
            self.state = space.sample_uniform(rng);
            self.steps_since_reset = 0;
        } else {
            self.state = proposal.clone();
        }
        Ok(proposal)
    }

    /// n-step advantage actor-critic estimate over `steps`. The last step
    /// bootstraps from `V(proposal)` unless it is terminal.
    pub fn a2c_gradient(&mut self, steps: &[ProposalStep], gamma: f64) -> Result<A2cGrads> {
        if steps.is_empty() {
            return Err(AdrError::EmptyTrajectory);
        }
        let t_len = steps.len();
        let mut returns = vec![0.0; t_len];
        let mut g = 0.0;
        for t in (0..t_len).rev() {
            let s = &steps[t];
            let r = s.reward.ok_or_else(|| {
                AdrError::Contract(format!("particle proposal {t} has no reward yet"))
            })?;
            if s.terminal {
                g = 0.0;
            } else if t == t_len - 1 {
                g = self.value(&s.proposal);
            }
            g = r + gamma * g;
            returns[t] = g;
        }

        let states: Vec<&[f64]> = steps.iter().map(|s| s.state.values()).collect();
        let states = Matrix::from_rows(&states)?;
        let values = self.critic.forward(&states)?;
        let advantages: Vec<f64> = returns
            .iter()
            .zip(values.data())
            .map(|(r, v)| r - v)
            .collect();
        let n = t_len as f64;
        let dv: Vec<f64> = values
            .data()
            .iter()
            .zip(&returns)
            .map(|(v, r)| 2.0 * (v - r) / n)
            .collect();
        let critic = self.critic.backward(&Matrix::from_vec(t_len, 1, dv)?)?;

        // ∇ log N(a; μ, σ): (a − μ)/σ² for μ, (a − μ)²/σ² − 1 for log σ.
        let means = self.actor.forward(&states)?;
        let d = self.dim();
        let mut up_mu = Matrix::zeros(t_len, d);
        let mut g_log_std = vec![0.0; d];
        for t in 0..t_len {
            let adv = advantages[t] / n;
            for k in 0..d {
                let var = (2.0 * self.log_std[k]).exp();
                let diff = steps[t].action[k] - means.get(t, k);
                up_mu.set(t, k, adv * diff / var);
                g_log_std[k] += adv * (diff * diff / var - 1.0);
            }
        }
        let actor_grads = self.actor.backward(&up_mu)?;
        let mut policy = actor_grads.flatten();
        policy.extend(g_log_std);
        Ok(A2cGrads {
            policy,
            critic,
            returns,
            advantages,
        })
    }
}
