//! Train ADR and UDR agents on PointPusher, then print the comparison table
//! and the per-cell final distances on the extrapolation cells.
//!
//! cargo run --release --example pusher_compare -- [steps] [seeds]

use adrlab::envs::EnvSpec;
use adrlab::eval::{compare, EvalGrid};
use adrlab::orchestrator::{run, AgentProfile, Mode, RunConfig, RunOptions};
use adrlab::stats::mean;

fn main() -> adrlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let mut reports = Vec::new();
    for mode in [Mode::Adr, Mode::Udr] {
        for seed in 1..=seeds {
            let cfg = RunConfig {
                mode,
                env: "point_pusher".into(),
                seed,
                max_timesteps: Some(steps),
                eval_every: steps / 5,
                agent_profile: AgentProfile::Desk,
                ..RunConfig::default()
            };
            reports.push(run(&cfg, RunOptions { progress: true, ..Default::default() })?.report);
        }
    }
    print!("{}", compare(&reports)?.table());

    let spec = EnvSpec::by_name("point_pusher")?;
    println!("\nmean distance to goal on extrapolation cells");
    for cell in EvalGrid::for_env(&spec, 1).hard_cells(&spec) {
        let dist = |mode: &str| {
            let v: Vec<f64> = reports
                .iter()
                .filter(|r| r.meta.mode == mode)
                .flat_map(|r| r.generalization.iter().filter(|g| g.cell == cell).map(|g| -g.mean / 100.0))
                .collect();
            mean(&v)
        };
        println!("{cell:<28} adr {:.4}  udr {:.4}", dist("adr"), dist("udr"));
    }
    Ok(())
}
