//! Deterministic policy-gradient agent with target networks, Gaussian
//! exploration noise and a uniform replay buffer.

mod replay;

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use replay::{Batch, ReplayBuffer, Source};

use crate::error::{AdrError, Result};
use crate::policy::Policy;
use crate::nn::{load_net, save_net, Activation, AdamState, Init, Matrix, Mlp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdpgConfig {
    pub hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub gamma: f64,
    pub tau: f64,
    pub batch_size: usize,
    /// Randomized-environment steps collected before the first update.
    pub warmup_steps: usize,
    pub noise_std: f64,
    pub replay_capacity: usize,
    pub init: Init,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            hidden: vec![400, 300],
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            gamma: 0.99,
            tau: 0.005,
            batch_size: 1000,
            warmup_steps: 1000,
            noise_std: 0.1,
            replay_capacity: 1_000_000,
            init: Init::UniformFanIn,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UpdateOutcome {
    /// Not enough data yet; nothing changed.
    Warmup,
    Trained(UpdateStats),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DdpgAgent {
    obs_dim: usize,
    act_dim: usize,
    config: DdpgConfig,
    pub actor: Mlp,
    pub critic: Mlp,
    pub actor_target: Mlp,
    pub critic_target: Mlp,
    actor_opt: AdamState,
    critic_opt: AdamState,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: String,
    obs_dim: usize,
    act_dim: usize,
    config: DdpgConfig,
}

const MANIFEST_FORMAT: &str = "adrlab-ddpg-v1";

impl DdpgAgent {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        act_dim: usize,
        config: DdpgConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let mut actor_sizes = vec![obs_dim];
        actor_sizes.extend(&config.hidden);
        actor_sizes.push(act_dim);
        let mut critic_sizes = vec![obs_dim + act_dim];
        critic_sizes.extend(&config.hidden);
        critic_sizes.push(1);
        let actor = Mlp::new(&actor_sizes, Activation::Relu, Activation::Tanh, config.init, rng)?;
        let critic = Mlp::new(
            &critic_sizes,
            Activation::Relu,
            Activation::Identity,
            config.init,
            rng,
        )?;
        Ok(Self {
            obs_dim,
            act_dim,
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            actor_opt: AdamState::new(config.actor_lr),
            critic_opt: AdamState::new(config.critic_lr),
            config,
        })
    }

    pub fn config(&self) -> &DdpgConfig {
        &self.config
    }

    pub fn new_buffer(&self) -> ReplayBuffer {
        ReplayBuffer::new(self.obs_dim, self.act_dim, self.config.replay_capacity)
    }

    /// Noise-free actor output for one observation.
    pub fn act_deterministic(&self, obs: &[f64]) -> Vec<f64> {
        let y = self
            .actor
            .predict(&Matrix::row(obs))
            .expect("observation width matches actor input");
        y.into_data()
    }

    fn ready(&self, buffer: &ReplayBuffer) -> bool {
        buffer.len() >= self.config.batch_size.max(self.config.warmup_steps)
    }

    /// One critic step, one actor step, then Polyak-average both targets.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        buffer: &ReplayBuffer,
        rng: &mut R,
    ) -> Result<UpdateOutcome> {
        if !self.ready(buffer) {
            return Ok(UpdateOutcome::Warmup);
        }
        let batch = buffer.sample(self.config.batch_size, rng)?;
        let n = batch.rewards.len() as f64;

        // Critic: regress Q(s, a) on r + γ(1 − terminal)·Q'(s', μ'(s')).
        let next_actions = self.actor_target.predict(&batch.next_obs)?;
        let next_q = self
            .critic_target
            .predict(&batch.next_obs.hcat(&next_actions)?)?;
        let targets: Vec<f64> = batch
            .rewards
            .iter()
            .zip(&batch.terminal)
            .zip(next_q.data())
            .map(|((r, t), q)| r + self.config.gamma * (1.0 - t) * q)
            .collect();
        let q = self.critic.forward(&batch.obs.hcat(&batch.actions)?)?;
        let mut critic_loss = 0.0;
        let dq: Vec<f64> = q
            .data()
            .iter()
            .zip(&targets)
            .map(|(q, y)| {
                critic_loss += (q - y) * (q - y);
                2.0 * (q - y) / n
            })
            .collect();
        critic_loss /= n;
        let grads = self.critic.backward(&Matrix::from_vec(q.rows(), 1, dq)?)?;
        self.critic_opt
            .step(self.critic.params_mut(), &grads.as_list())?;

        // Actor: ascend Q(s, μ(s)) through the freshly updated critic.
        let actions = self.actor.forward(&batch.obs)?;
        let q_pi = self.critic.forward(&batch.obs.hcat(&actions)?)?;
        let actor_loss = -q_pi.mean();
        let critic_grads = self
            .critic
            .backward(&Matrix::filled(q_pi.rows(), 1, -1.0 / n))?;
        let d_action = critic_grads.input.columns(self.obs_dim, self.act_dim)?;
        let actor_grads = self.actor.backward(&d_action)?;
        self.actor_opt
            .step(self.actor.params_mut(), &actor_grads.as_list())?;

        self.actor_target
            .soft_update_from(&self.actor, self.config.tau)?;
        self.critic_target
            .soft_update_from(&self.critic, self.config.tau)?;
        Ok(UpdateOutcome::Trained(UpdateStats {
            critic_loss,
            actor_loss,
        }))
    }

    /// Mean squared TD error of the live critic on a fixed batch.
    pub fn td_error(&self, batch: &Batch) -> Result<f64> {
        let next_actions = self.actor_target.predict(&batch.next_obs)?;
        let next_q = self
            .critic_target
            .predict(&batch.next_obs.hcat(&next_actions)?)?;
        let q = self.critic.predict(&batch.obs.hcat(&batch.actions)?)?;
        let n = batch.rewards.len() as f64;
        Ok(q.data()
            .iter()
            .zip(&batch.rewards)
            .zip(&batch.terminal)
            .zip(next_q.data())
            .map(|(((q, r), t), nq)| {
                let y = r + self.config.gamma * (1.0 - t) * nq;
                (q - y) * (q - y)
            })
            .sum::<f64>()
            / n)
    }

    /// Write `manifest.json` plus one nn checkpoint per network into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| AdrError::io(dir, e))?;
        let manifest = Manifest {
            format: MANIFEST_FORMAT.into(),
            obs_dim: self.obs_dim,
            act_dim: self.act_dim,
            config: self.config.clone(),
        };
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)?)
            .map_err(|e| AdrError::io(&path, e))?;
        save_net(dir.join("actor.json"), &self.actor, Some(&self.actor_opt))?;
        save_net(dir.join("critic.json"), &self.critic, Some(&self.critic_opt))?;
        save_net(dir.join("actor_target.json"), &self.actor_target, None)?;
        save_net(dir.join("critic_target.json"), &self.critic_target, None)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(|e| AdrError::io(&path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| AdrError::Checkpoint {
            path: path.clone(),
            field: e.to_string().split('`').nth(1).unwrap_or("<document>").into(),
            reason: e.to_string(),
        })?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(AdrError::Checkpoint {
                path,
                field: "format".into(),
                reason: format!("expected {MANIFEST_FORMAT}, found {}", manifest.format),
            });
        }
        let (actor, actor_opt) = load_net(dir.join("actor.json"))?;
        let (critic, critic_opt) = load_net(dir.join("critic.json"))?;
        let (actor_target, _) = load_net(dir.join("actor_target.json"))?;
        let (critic_target, _) = load_net(dir.join("critic_target.json"))?;
        let (o, a) = (manifest.obs_dim, manifest.act_dim);
        let check = |what: &str, expected: usize, found: usize| -> Result<()> {
            if expected != found {
                return Err(AdrError::Dimension {
                    what: what.into(),
                    expected,
                    found,
                });
            }
            Ok(())
        };
        check("actor input (obs_dim)", o, actor.input_dim())?;
        check("actor output (act_dim)", a, actor.output_dim())?;
        check("critic input (obs_dim + act_dim)", o + a, critic.input_dim())?;
        check("critic output", 1, critic.output_dim())?;
        if !actor.same_architecture(&actor_target) || !critic.same_architecture(&critic_target) {
            return Err(AdrError::Architecture("target networks differ from live networks".into()));
        }
        Ok(Self {
            obs_dim: o,
            act_dim: a,
            actor,
            critic,
            actor_target,
            critic_target,
            actor_opt: actor_opt.unwrap_or_else(|| AdamState::new(manifest.config.actor_lr)),
            critic_opt: critic_opt.unwrap_or_else(|| AdamState::new(manifest.config.critic_lr)),
            config: manifest.config,
        })
    }

    /// Load and require specific observation/action widths.
    pub fn load_expecting(dir: impl AsRef<Path>, obs_dim: usize, act_dim: usize) -> Result<Self> {
        let agent = Self::load(dir)?;
        if agent.obs_dim != obs_dim {
            return Err(AdrError::Dimension {
                what: "checkpoint obs_dim".into(),
                expected: obs_dim,
                found: agent.obs_dim,
            });
        }
        if agent.act_dim != act_dim {
            return Err(AdrError::Dimension {
                what: "checkpoint act_dim".into(),
                expected: act_dim,
                found: agent.act_dim,
            });
        }
        Ok(agent)
    }
}

impl Policy for DdpgAgent {
    fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    fn act_dim(&self) -> usize {
        self.act_dim
    }

    fn act(&self, obs: &[f64], explore: bool, rng: &mut dyn rand::RngCore) -> Vec<f64> {
        let mut a = self.act_deterministic(obs);
        if explore && self.config.noise_std > 0.0 {
            let noise = Normal::new(0.0, self.config.noise_std).expect("positive std");
            for x in &mut a {
                *x = (*x + noise.sample(rng)).clamp(-1.0, 1.0);
            }
        }
        a
    }
}
