//! Self-contained continuous-control tasks. Each task is a factory: given a
//! point of its randomization space (or explicit physical parameters) and a
//! seed it builds an episodic environment instance.
//!
//! | name           | obs | act | limit | randomized parameters                         |
//! |----------------|-----|-----|-------|-----------------------------------------------|
//! | `droplander`   | 2   | 1   | 1000  | main engine strength `[8, 20]`, ref 13        |
//! | `point_pusher` | 8   | 2   | 100   | puck friction / damping `[0.67, 1.0]×default` |
//! | `reacher4`     | 12  | 4   | 100   | joint damping `[0.3, 2]×`, max torque `[1, 4]×` |

mod droplander;
mod pusher;
mod reacher;

use serde::{Deserialize, Serialize};

pub use droplander::{Droplander, DroplanderConstants};
pub use pusher::{PointPusher, PusherConstants};
pub use reacher::{Reacher4, ReacherConstants};

use crate::error::{AdrError, Result};
use crate::space::{RandConfig, RandDim, RandSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Droplander,
    PointPusher,
    Reacher4,
}

impl EnvKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "droplander" => Ok(EnvKind::Droplander),
            "point_pusher" | "pointpusher" => Ok(EnvKind::PointPusher),
            "reacher4" => Ok(EnvKind::Reacher4),
            other => Err(AdrError::UnknownEnv(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Droplander => "droplander",
            EnvKind::PointPusher => "point_pusher",
            EnvKind::Reacher4 => "reacher4",
        }
    }
}

/// Per-task physical constants; every field can be overridden from the run
/// config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvConstants {
    Droplander(DroplanderConstants),
    PointPusher(PusherConstants),
    Reacher4(ReacherConstants),
}

/// Static description of a task.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub episode_limit: usize,
    pub rand_space: RandSpace,
    pub ref_config: RandConfig,
    /// `|r| <= reward_bound` on every step for parameters inside the space.
    pub reward_bound: f64,
    pub constants: EnvConstants,
}

impl EnvSpec {
    pub fn by_name(name: &str) -> Result<Self> {
        Self::new(EnvKind::parse(name)?)
    }

    pub fn new(kind: EnvKind) -> Result<Self> {
        let constants = match kind {
            EnvKind::Droplander => EnvConstants::Droplander(DroplanderConstants::default()),
            EnvKind::PointPusher => EnvConstants::PointPusher(PusherConstants::default()),
            EnvKind::Reacher4 => EnvConstants::Reacher4(ReacherConstants::default()),
        };
        Self::with_constants(constants)
    }

    /// Apply a JSON object of constant overrides (field name → value) on top
    /// of the defaults. Unknown fields are rejected.
    pub fn with_overrides(kind: EnvKind, overrides: &serde_json::Value) -> Result<Self> {
        let base = Self::new(kind)?;
        let serde_json::Value::Object(patch) = overrides else {
            return Err(AdrError::Config("env overrides must be a JSON object".into()));
        };
        let mut current = serde_json::to_value(&base.constants)?;
        let obj = current.as_object_mut().expect("constants serialize as objects");
        for (k, v) in patch {
            if k == "kind" || !obj.contains_key(k) {
                return Err(AdrError::Config(format!(
                    "unknown constant `{k}` for env {}",
                    kind.name()
                )));
            }
            obj.insert(k.clone(), v.clone());
        }
        let constants: EnvConstants = serde_json::from_value(current)
            .map_err(|e| AdrError::Config(format!("env overrides: {e}")))?;
        Self::with_constants(constants)
    }

    pub fn with_constants(constants: EnvConstants) -> Result<Self> {
        let spec = match &constants {
            EnvConstants::Droplander(c) => EnvSpec {
                kind: EnvKind::Droplander,
                obs_dim: 2,
                act_dim: 1,
                episode_limit: c.episode_limit,
                rand_space: RandSpace::new(vec![RandDim {
                    name: "main_engine_strength".into(),
                    low: c.mes_low,
                    high: c.mes_high,
                }])?,
                ref_config: RandConfig::new(vec![0.0]),
                reward_bound: c.reward_bound(),
                constants: constants.clone(),
            },
            EnvConstants::PointPusher(c) => EnvSpec {
                kind: EnvKind::PointPusher,
                obs_dim: 8,
                act_dim: 2,
                episode_limit: c.episode_limit,
                rand_space: RandSpace::new(vec![
                    RandDim {
                        name: "puck_friction_loss".into(),
                        low: c.train_low,
                        high: c.train_high,
                    },
                    RandDim {
                        name: "puck_joint_damping".into(),
                        low: c.train_low,
                        high: c.train_high,
                    },
                ])?,
                ref_config: RandConfig::new(vec![0.0, 0.0]),
                reward_bound: c.reward_bound(),
                constants: constants.clone(),
            },
            EnvConstants::Reacher4(c) => {
                let mut dims = Vec::with_capacity(8);
                for j in 0..4 {
                    dims.push(RandDim {
                        name: format!("joint{j}_damping"),
                        low: c.damping_low,
                        high: c.damping_high,
                    });
                }
                for j in 0..4 {
                    dims.push(RandDim {
                        name: format!("joint{j}_max_torque"),
                        low: c.torque_low,
                        high: c.torque_high,
                    });
                }
                EnvSpec {
                    kind: EnvKind::Reacher4,
                    obs_dim: 12,
                    act_dim: 4,
                    episode_limit: c.episode_limit,
                    rand_space: RandSpace::new(dims)?,
                    ref_config: RandConfig::new(vec![0.0; 8]),
                    reward_bound: c.reward_bound(),
                    constants: constants.clone(),
                }
            }
        };
        let reference = spec.default_physical();
        let ref_config = spec.rand_space.normalize(&reference)?;
        Ok(EnvSpec { ref_config, ..spec })
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Physical parameters of the reference (default) task.
    pub fn default_physical(&self) -> Vec<f64> {
        match &self.constants {
            EnvConstants::Droplander(c) => vec![c.mes_default],
            EnvConstants::PointPusher(_) => vec![1.0, 1.0],
            EnvConstants::Reacher4(_) => vec![1.0; 8],
        }
    }

    /// Build an instance at a normalized configuration.
    pub fn make(&self, cfg: &RandConfig, seed: u64) -> Result<Box<dyn Env>> {
        if cfg.len() != self.rand_space.len() {
            return Err(AdrError::Dimension {
                what: format!("config for {}", self.name()),
                expected: self.rand_space.len(),
                found: cfg.len(),
            });
        }
        self.make_physical(&self.rand_space.denormalize(cfg), seed)
    }

    /// Build an instance from explicit physical parameters, which may lie
    /// outside the training box (evaluation of extrapolation).
    pub fn make_physical(&self, physical: &[f64], seed: u64) -> Result<Box<dyn Env>> {
        if physical.len() != self.rand_space.len() {
            return Err(AdrError::Dimension {
                what: format!("physical parameters for {}", self.name()),
                expected: self.rand_space.len(),
                found: physical.len(),
            });
        }
        Ok(match &self.constants {
            EnvConstants::Droplander(c) => {
                Box::new(Droplander::new(self.clone(), c.clone(), physical[0], seed))
            }
            EnvConstants::PointPusher(c) => Box::new(PointPusher::new(
                self.clone(),
                c.clone(),
                [physical[0], physical[1]],
                seed,
            )),
            EnvConstants::Reacher4(c) => {
                let mut p = [0.0; 8];
                p.copy_from_slice(physical);
                Box::new(Reacher4::new(self.clone(), c.clone(), p, seed))
            }
        })
    }

    pub fn make_reference(&self, seed: u64) -> Result<Box<dyn Env>> {
        self.make_physical(&self.default_physical(), seed)
    }
}

/// Free-function form of [`EnvSpec::make`].
pub fn make_env(spec: &EnvSpec, cfg: &RandConfig, seed: u64) -> Result<Box<dyn Env>> {
    spec.make(cfg, seed)
}

/// One environment step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: f64,
    pub s_next: Vec<f64>,
    /// The episode ended (terminal state or time limit).
    pub done: bool,
    /// The episode ended in a true terminal state; time-limit truncation is
    /// `done && !terminal` and still bootstraps.
    pub terminal: bool,
}

/// An episodic environment instance.
pub trait Env: Send {
    fn spec(&self) -> &EnvSpec;
    fn physical_params(&self) -> &[f64];
    /// Start a new episode; goal and start draws come from the instance rng.
    fn reset(&mut self) -> Vec<f64>;
    /// Advance one control step. Actions are clamped to `[-1, 1]`.
    fn step(&mut self, action: &[f64]) -> Transition;
    fn steps(&self) -> usize;
}

pub(crate) fn clamp_action(action: &[f64], dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|i| {
            let a = action.get(i).copied().unwrap_or(0.0);
            if a.is_nan() {
                0.0
            } else {
                a.clamp(-1.0, 1.0)
            }
        })
        .collect()
}

/// Roll out one episode with a closure policy, returning the transitions.
pub fn rollout(env: &mut dyn Env, mut policy: impl FnMut(&[f64]) -> Vec<f64>) -> Vec<Transition> {
    let mut obs = env.reset();
    let mut out = Vec::new();
    loop {
        let a = policy(&obs);
        let t = env.step(&a);
        obs = t.s_next.clone();
        let done = t.done;
        out.push(t);
        if done {
            break;
        }
    }
    out
}
