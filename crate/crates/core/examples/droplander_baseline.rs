//! Train DDPG on the reference Droplander (MES = 13) and print the
//! evaluation curve.
//!
//! cargo run --release --example droplander_baseline -- [steps] [seed]

use adrlab::orchestrator::{run, AgentProfile, Mode, RunConfig, RunOptions};

fn main() -> adrlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = RunConfig {
        mode: Mode::Baseline,
        env: "droplander".into(),
        seed,
        max_timesteps: Some(steps),
        eval_every: 10_000,
        agent_profile: AgentProfile::Desk,
        ..RunConfig::default()
    };
    let out = run(&cfg, RunOptions { progress: true, ..Default::default() })?;
    for row in out.report.learning_curve.iter().filter(|r| r.env_cell == "mes=13") {
        println!("t={:>7}  MES=13 return {:8.2}", row.timestep, row.mean_return);
    }
    Ok(())
}
