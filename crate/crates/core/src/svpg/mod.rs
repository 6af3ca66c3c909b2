//! Stein variational policy-gradient sampler. An ensemble of particles walks
//! the normalized randomization space; each particle is pulled towards
//! higher discriminator reward and pushed away from the others by an RBF
//! kernel on the policy parameters.

mod kernel;
mod particle;

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use kernel::{median_pairwise_sq, squared_distance, ConstantKernel, KernelTerms, RbfMedian, SteinKernel};
pub use particle::{A2cGrads, Particle, ProposalStep};

use crate::error::{AdrError, Result};
use crate::nn::{load_net, save_net, AdamState, Matrix};
use crate::space::{RandConfig, RandSpace};

/// How the Stein direction is applied to the particle parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// The direction is handed to Adam as a (negated) gradient.
    Adam,
    /// `φ ← φ + lr · direction`.
    Sgd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvpgConfig {
    pub particles: usize,
    pub alpha: f64,
    pub lr: f64,
    pub gamma: f64,
    pub horizon: usize,
    pub max_step: f64,
    pub hidden: Vec<usize>,
    pub log_std_init: f64,
    pub log_std_min: f64,
    pub log_std_max: f64,
    /// Gain of the actor's output layer; small values start the walk unbiased.
    pub output_gain: f64,
    pub step_rule: StepRule,
}

impl Default for SvpgConfig {
    fn default() -> Self {
        Self {
            particles: 10,
            alpha: 10.0,
            lr: 3e-4,
            gamma: 0.99,
            horizon: 50,
            max_step: 0.05,
            hidden: vec![100, 100],
            log_std_init: 0.5f64.ln(),
            log_std_min: 0.05f64.ln(),
            log_std_max: 0.0,
            output_gain: 0.01,
            step_rule: StepRule::Adam,
        }
    }
}

/// Diagnostics from one ensemble update.
#[derive(Clone, Debug, PartialEq)]
pub struct SvpgUpdate {
    pub mean_return: f64,
    pub mean_abs_advantage: f64,
    pub directions: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub struct Ensemble {
    space: RandSpace,
    config: SvpgConfig,
    particles: Vec<Particle>,
    policy_opts: Vec<AdamState>,
    kernel: Box<dyn SteinKernel>,
}

#[derive(Serialize, Deserialize)]
struct ParticleRecord {
    state: RandConfig,
    steps_since_reset: usize,
    log_std: Vec<f64>,
    policy_adam: AdamState,
}

#[derive(Serialize, Deserialize)]
struct EnsembleManifest {
    format: String,
    space: RandSpace,
    config: SvpgConfig,
    particles: Vec<ParticleRecord>,
}

const MANIFEST_FORMAT: &str = "adrlab-svpg-v1";

impl Ensemble {
    pub fn new<R: Rng + ?Sized>(space: RandSpace, config: SvpgConfig, rng: &mut R) -> Result<Self> {
        if config.particles == 0 {
            return Err(AdrError::Config("svpg needs at least one particle".into()));
        }
        if config.horizon == 0 {
            return Err(AdrError::Config("svpg horizon must be positive".into()));
        }
        let particles = (0..config.particles)
            .map(|_| Particle::new(&space, &config, rng))
            .collect::<Result<Vec<_>>>()?;
        let policy_opts = vec![AdamState::new(config.lr); config.particles];
        Ok(Self {
            space,
            config,
            particles,
            policy_opts,
            kernel: Box::new(RbfMedian),
        })
    }

    /// Swap the kernel, e.g. for [`ConstantKernel`] in tests.
    pub fn with_kernel(mut self, kernel: Box<dyn SteinKernel>) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn space(&self) -> &RandSpace {
        &self.space
    }

    pub fn config(&self) -> &SvpgConfig {
        &self.config
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn particles_mut(&mut self) -> &mut [Particle] {
        &mut self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// One proposal per particle, in particle order.
    pub fn propose<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<RandConfig>> {
        let (space, cfg) = (&self.space, &self.config);
        self.particles
            .iter_mut()
            .map(|p| p.propose(space, cfg, rng))
            .collect()
    }

    /// Attach one reward to each particle's most recent proposal.
    pub fn assign_rewards(&mut self, rewards: &[f64]) -> Result<()> {
        if rewards.len() != self.particles.len() {
            return Err(AdrError::Dimension {
                what: "particle rewards".into(),
                expected: self.particles.len(),
                found: rewards.len(),
            });
        }
        for (i, (p, r)) in self.particles.iter_mut().zip(rewards).enumerate() {
            if !r.is_finite() {
                return Err(AdrError::NonFinite("particle reward"));
            }
            match p.rollout.last_mut() {
                Some(step) if step.reward.is_none() => step.reward = Some(*r),
                _ => {
                    return Err(AdrError::Contract(format!(
                        "particle {i} has no pending proposal to reward"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Stein direction per particle:
    /// `(1/N) Σ_j [∇J_j · k(φ_j, φ_i) + α · ∇_{φ_j} k(φ_j, φ_i)]`.
    pub fn svgd_direction(&self, phis: &[Vec<f64>], grads: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = phis.len();
        let terms = self.kernel.evaluate(phis);
        let inv_n = 1.0 / n as f64;
        (0..n)
            .map(|i| {
                let mut d: Vec<f64> = terms.repulsion[i]
                    .iter()
                    .map(|r| self.config.alpha * r)
                    .collect();
                for (j, g) in grads.iter().enumerate() {
                    let k = terms.gram[j][i];
                    for (d, g) in d.iter_mut().zip(g) {
                        *d += g * k;
                    }
                }
                d.iter_mut().for_each(|x| *x *= inv_n);
                d
            })
            .collect()
    }

    /// A2C estimates for every particle's pending rollout, the Stein step on
    /// the actors, and a value-regression step on each critic. Clears the
    /// rollouts afterwards.
    pub fn update(&mut self) -> Result<SvpgUpdate> {
        for (i, p) in self.particles.iter().enumerate() {
            if p.rollout.is_empty() {
                return Err(AdrError::Contract(format!("particle {i} has no proposals to learn from")));
            }
            if p.rollout.iter().any(|s| s.reward.is_none()) {
                return Err(AdrError::Contract(format!("particle {i} has unscored proposals")));
            }
        }
        let gamma = self.config.gamma;
        let mut policy_grads = Vec::with_capacity(self.len());
        let mut sum_ret = 0.0;
        let mut sum_adv = 0.0;
        let mut count = 0.0;
        for p in &mut self.particles {
            let steps = std::mem::take(&mut p.rollout);
            let g = p.a2c_gradient(&steps, gamma)?;
            sum_ret += g.returns.iter().sum::<f64>();
            sum_adv += g.advantages.iter().map(|a| a.abs()).sum::<f64>();
            count += g.returns.len() as f64;
            p.critic_opt.step(p.critic.params_mut(), &g.critic.as_list())?;
            policy_grads.push(g.policy);
        }
        let phis: Vec<Vec<f64>> = self.particles.iter().map(Particle::flat_policy).collect();
        let directions = self.svgd_direction(&phis, &policy_grads);
        for (i, (p, phi)) in self.particles.iter_mut().zip(phis).enumerate() {
            let dir = &directions[i];
            let new_phi = match self.config.step_rule {
                StepRule::Sgd => phi.iter().zip(dir).map(|(x, d)| x + self.config.lr * d).collect(),
                StepRule::Adam => {
                    let n = phi.len();
                    let mut m = Matrix::from_vec(1, n, phi)?;
                    let g = Matrix::from_vec(1, n, dir.iter().map(|d| -d).collect())?;
                    self.policy_opts[i].step(vec![&mut m], &[&g])?;
                    m.into_data()
                }
            };
            p.set_flat_policy(&new_phi, &self.config)?;
        }
        Ok(SvpgUpdate {
            mean_return: sum_ret / count,
            mean_abs_advantage: sum_adv / count,
            directions,
        })
    }

    /// `manifest.json` plus `particle_<i>_actor.json` / `particle_<i>_critic.json`.
    /// Pending (unlearned) proposals are not saved.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| AdrError::io(dir, e))?;
        let manifest = EnsembleManifest {
            format: MANIFEST_FORMAT.into(),
            space: self.space.clone(),
            config: self.config.clone(),
            particles: self
                .particles
                .iter()
                .zip(&self.policy_opts)
                .map(|(p, opt)| ParticleRecord {
                    state: p.state.clone(),
                    steps_since_reset: p.steps_since_reset,
                    log_std: p.log_std.clone(),
                    policy_adam: opt.clone(),
                })
                .collect(),
        };
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| AdrError::io(&path, e))?;
        for (i, p) in self.particles.iter().enumerate() {
            save_net(dir.join(format!("particle_{i}_actor.json")), &p.actor, None)?;
            save_net(
                dir.join(format!("particle_{i}_critic.json")),
                &p.critic,
                Some(&p.critic_opt),
            )?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(|e| AdrError::io(&path, e))?;
        let bad = |field: &str, reason: String| AdrError::Checkpoint {
            path: path.clone(),
            field: field.into(),
            reason,
        };
        let m: EnsembleManifest = serde_json::from_str(&text).map_err(|e| {
            let msg = e.to_string();
            bad(msg.split('`').nth(1).unwrap_or("<document>"), msg.clone())
        })?;
        if m.format != MANIFEST_FORMAT {
            return Err(bad("format", format!("expected {MANIFEST_FORMAT}, found {}", m.format)));
        }
        if m.particles.len() != m.config.particles {
            return Err(bad(
                "particles",
                format!("config says {}, found {}", m.config.particles, m.particles.len()),
            ));
        }
        let d = m.space.len();
        let mut particles = Vec::with_capacity(m.particles.len());
        let mut policy_opts = Vec::with_capacity(m.particles.len());
        for (i, rec) in m.particles.into_iter().enumerate() {
            let (actor, _) = load_net(dir.join(format!("particle_{i}_actor.json")))?;
            let (critic, critic_opt) = load_net(dir.join(format!("particle_{i}_critic.json")))?;
            if actor.input_dim() != d || actor.output_dim() != d || critic.input_dim() != d {
                return Err(AdrError::Dimension {
                    what: format!("particle {i} network width"),
                    expected: d,
                    found: actor.input_dim(),
                });
            }
            if rec.state.len() != d || rec.log_std.len() != d {
                return Err(bad(&format!("particles[{i}]"), format!("expected {d} coordinates")));
            }
            particles.push(Particle {
                actor,
                critic,
                log_std: rec.log_std,
                state: rec.state,
                steps_since_reset: rec.steps_since_reset,
                rollout: Vec::new(),
                critic_opt: critic_opt.unwrap_or_else(|| AdamState::new(m.config.lr)),
            });
            policy_opts.push(rec.policy_adam);
        }
        Ok(Self {
            space: m.space,
            config: m.config,
            particles,
            policy_opts,
            kernel: Box::new(RbfMedian),
        })
    }
}
