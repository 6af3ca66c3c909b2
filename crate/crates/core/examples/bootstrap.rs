//! Reuse a trained sampler and discriminator for a fresh agent: a short ADR
//! run saves its checkpoints, then a bootstrap run starts a new agent from
//! them and both grids are compared.
//!
//! cargo run --release --example bootstrap -- [steps]

use adrlab::eval::compare;
use adrlab::orchestrator::{run, AgentProfile, Mode, RunConfig, RunOptions};

fn main() -> adrlab::Result<()> {
    let steps: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30_000);
    let dir = std::env::temp_dir().join("adrlab-bootstrap-example");
    let _ = std::fs::remove_dir_all(&dir);
    let base = RunConfig {
        env: "point_pusher".into(),
        max_timesteps: Some(steps),
        eval_every: steps / 3,
        agent_profile: AgentProfile::Desk,
        ..RunConfig::default()
    };
    let opts = RunOptions { progress: true, ..Default::default() };

    let adr = run(
        &RunConfig { mode: Mode::Adr, seed: 1, out_dir: Some(dir.join("adr")), ..base.clone() },
        opts.clone(),
    )?;
    let ck = dir.join("adr/checkpoints");
    let boot = run(
        &RunConfig {
            mode: Mode::Bootstrap,
            seed: 2,
            ensemble_checkpoint: Some(ck.join("ensemble")),
            discriminator_checkpoint: Some(ck.join("discriminator.json")),
            out_dir: Some(dir.join("bootstrap")),
            ..base
        },
        opts,
    )?;
    print!("{}", compare(&[adr.report, boot.report])?.table());
    println!("outputs in {}", dir.display());
    Ok(())
}
