//! The agent-facing interface shared by training rollouts and evaluation.

use rand::RngCore;

use crate::envs::{Env, Transition};

/// Anything that maps observations to actions in `[-1, 1]^act_dim`.
pub trait Policy: Sync {
    fn obs_dim(&self) -> usize;
    fn act_dim(&self) -> usize;
    fn act(&self, obs: &[f64], explore: bool, rng: &mut dyn RngCore) -> Vec<f64>;
}

/// A closure-backed policy, handy for scripted controllers.
pub struct FnPolicy<F> {
    obs_dim: usize,
    act_dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> FnPolicy<F> {
    pub fn new(obs_dim: usize, act_dim: usize, f: F) -> Self {
        Self { obs_dim, act_dim, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> Policy for FnPolicy<F> {
    fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    fn act_dim(&self) -> usize {
        self.act_dim
    }

    fn act(&self, obs: &[f64], _explore: bool, _rng: &mut dyn RngCore) -> Vec<f64> {
        (self.f)(obs)
    }
}

/// Reset `env` and run one episode.
pub fn run_episode(
    env: &mut dyn Env,
    policy: &dyn Policy,
    explore: bool,
    rng: &mut dyn RngCore,
) -> Vec<Transition> {
    crate::envs::rollout(env, |obs| policy.act(obs, explore, rng))
}
