//! Active domain randomization on Droplander: the sampler proposes main
//! engine strengths, the discriminator scores how distinguishable each
//! randomized rollout is from the reference, and the agent trains on all
//! proposals. Prints the hard-band curve and the final sampling histogram.
//!
//! cargo run --release --example droplander_adr -- [steps] [seed] [out_dir]

use adrlab::eval::{sampling_histogram, EvalGrid};
use adrlab::orchestrator::{run, AgentProfile, Mode, RunConfig, RunOptions};

fn main() -> adrlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let out_dir = args.next().map(Into::into);
    let cfg = RunConfig {
        mode: Mode::Adr,
        env: "droplander".into(),
        seed,
        max_timesteps: Some(steps),
        eval_every: 10_000,
        agent_profile: AgentProfile::Desk,
        out_dir,
        ..RunConfig::default()
    };
    let out = run(&cfg, RunOptions { progress: true, ..Default::default() })?;
    let spec = cfg.spec()?;
    let hard = EvalGrid::for_env(&spec, cfg.eval_resets).hard_cells(&spec);

    println!("timestep  hard-band mean");
    let mut t = None;
    let mut acc = Vec::new();
    for row in &out.report.learning_curve {
        if t != Some(row.timestep) && !acc.is_empty() {
            println!("{:>8}  {:8.2}", t.unwrap(), adrlab::stats::mean(&acc));
            acc.clear();
        }
        t = Some(row.timestep);
        if hard.contains(&row.env_cell) {
            acc.push(row.mean_return);
        }
    }
    if let Some(t) = t {
        println!("{:>8}  {:8.2}", t, adrlab::stats::mean(&acc));
    }

    for a in &out.disc_accuracy {
        println!("discriminator accuracy at {}: {:.3}", a.timestep, a.accuracy);
    }

    let hist = sampling_histogram(&out.report, cfg.eval_every, cfg.hist_bins)?;
    let last = hist.last().map(|h| h.bucket_start).unwrap_or(0);
    let counts: Vec<u64> = hist.iter().filter(|h| h.bucket_start == last).map(|h| h.count).collect();
    println!("final-bucket proposals over MES bins [8, 20]: {counts:?}");
    println!("final grid mean {:.2}", out.report.grid_mean());
    Ok(())
}
