//! Run configuration: one JSON document, every field optional.
//!
//! ```json
//! {
//!   "mode": "adr",
//!   "env": "droplander",
//!   "seed": 1,
//!   "max_timesteps": 300000,
//!   "agent_profile": "desk",
//!   "svpg": { "particles": 10 },
//!   "disc": { "batch_size": 128 }
//! }
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ddpg::DdpgConfig;
use crate::envs::{EnvKind, EnvSpec};
use crate::error::{AdrError, Result};
use crate::svpg::SvpgConfig;

pub const SEED_ENV_VAR: &str = "ADRLAB_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Adr,
    Udr,
    Baseline,
    Bootstrap,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Adr => "adr",
            Mode::Udr => "udr",
            Mode::Baseline => "baseline",
            Mode::Bootstrap => "bootstrap",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| AdrError::Config(format!("unknown mode `{s}` (adr, udr, baseline, bootstrap)")))
    }
}

/// Preset agent sizes. `full` is the full-size network; `desk` trades
/// capacity for speed on a single CPU core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentProfile {
    Full,
    Desk,
}

impl AgentProfile {
    pub fn config(self) -> DdpgConfig {
        match self {
            AgentProfile::Full => DdpgConfig::default(),
            AgentProfile::Desk => DdpgConfig {
                hidden: vec![64, 64],
                batch_size: 128,
                ..DdpgConfig::default()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscConfig {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub batch_size: usize,
    /// Training steps per iteration; defaults to one per randomized episode.
    pub steps_per_iteration: Option<usize>,
    /// Pin the output at p = 0.5 and never train (ablation).
    pub frozen_uniform: bool,
}

impl Default for DiscConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 128],
            lr: 2e-4,
            batch_size: 128,
            steps_per_iteration: None,
            frozen_uniform: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub env: String,
    /// Constant overrides for the environment, e.g. `{"gravity": 7.0}`.
    pub env_overrides: Option<serde_json::Value>,
    /// Defaults to 300k for droplander and 500k otherwise.
    pub max_timesteps: Option<u64>,
    pub seed: u64,
    pub eval_every: u64,
    pub eval_resets: usize,
    pub hist_bins: usize,
    pub agent_profile: AgentProfile,
    /// Full agent hyperparameters; overrides `agent_profile` when present.
    pub agent: Option<DdpgConfig>,
    /// Defaults to 10 particles for droplander, 15 otherwise.
    pub svpg: Option<SvpgConfig>,
    pub disc: DiscConfig,
    pub ensemble_checkpoint: Option<PathBuf>,
    pub discriminator_checkpoint: Option<PathBuf>,
    /// Where report files go; nothing is written when absent.
    pub out_dir: Option<PathBuf>,
    pub save_checkpoints: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Adr,
            env: "droplander".into(),
            env_overrides: None,
            max_timesteps: None,
            seed: 0,
            eval_every: 25_000,
            eval_resets: 5,
            hist_bins: 20,
            agent_profile: AgentProfile::Full,
            agent: None,
            svpg: None,
            disc: DiscConfig::default(),
            ensemble_checkpoint: None,
            discriminator_checkpoint: None,
            out_dir: None,
            save_checkpoints: true,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| AdrError::Config(e.to_string()))
    }

    pub fn from_file(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let text = std::fs::read_to_string(&path)
            .map_err(|e| AdrError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| AdrError::Config(format!("{}: {e}", path.display())))
    }

    /// Apply `ADRLAB_SEED` if it is set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV_VAR) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| AdrError::Config(format!("{SEED_ENV_VAR}=`{v}` is not an unsigned integer")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        if self.mode == Mode::Bootstrap {
            let mut missing = Vec::new();
            if self.ensemble_checkpoint.is_none() {
                missing.push("ensemble_checkpoint");
            }
            if self.discriminator_checkpoint.is_none() {
                missing.push("discriminator_checkpoint");
            }
            if !missing.is_empty() {
                return Err(AdrError::Config(format!(
                    "bootstrap mode requires {}",
                    missing.join(", ")
                )));
            }
        }
        if self.eval_every == 0 {
            return Err(AdrError::Config("eval_every must be positive".into()));
        }
        if self.eval_resets == 0 {
            return Err(AdrError::Config("eval_resets must be positive".into()));
        }
        if self.hist_bins == 0 {
            return Err(AdrError::Config("hist_bins must be positive".into()));
        }
        let agent = self.agent_config();
        if agent.batch_size == 0 || agent.hidden.is_empty() {
            return Err(AdrError::Config("agent needs a positive batch and hidden layers".into()));
        }
        if self.svpg_config().particles == 0 {
            return Err(AdrError::Config("svpg.particles must be positive".into()));
        }
        if self.disc.batch_size < 2 {
            return Err(AdrError::Config("disc.batch_size must be at least 2".into()));
        }
        Ok(())
    }

    pub fn kind(&self) -> Result<EnvKind> {
        EnvKind::parse(&self.env)
    }

    pub fn spec(&self) -> Result<EnvSpec> {
        let kind = self.kind()?;
        match &self.env_overrides {
            Some(o) => EnvSpec::with_overrides(kind, o),
            None => EnvSpec::new(kind),
        }
    }

    pub fn max_steps(&self) -> u64 {
        self.max_timesteps.unwrap_or(match self.kind() {
            Ok(EnvKind::Droplander) => 300_000,
            _ => 500_000,
        })
    }

    pub fn agent_config(&self) -> DdpgConfig {
        self.agent.clone().unwrap_or_else(|| self.agent_profile.config())
    }

    pub fn svpg_config(&self) -> SvpgConfig {
        self.svpg.clone().unwrap_or_else(|| SvpgConfig {
            particles: match self.kind() {
                Ok(EnvKind::Droplander) => 10,
                _ => 15,
            },
            ..SvpgConfig::default()
        })
    }

    /// SHA-256 over the canonical JSON of the settings that affect results.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = None;
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
