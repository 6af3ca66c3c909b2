pub mod ddpg;
pub mod disc;
pub mod envs;
pub mod error;
pub mod eval;
pub mod nn;
pub mod orchestrator;
pub mod policy;
pub mod rng;
pub mod space;
pub mod stats;
pub mod svpg;

pub use error::{AdrError, Result};
pub use policy::{run_episode, FnPolicy, Policy};
