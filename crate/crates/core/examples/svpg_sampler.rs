//! The particle sampler on its own: particles are rewarded for proposing
//! large values along the first randomization dimension. Their proposals
//! drift upward along that axis while the second one, which earns nothing,
//! stays spread out. The Gaussian mean is unbounded while each step is
//! clipped to 0.05, so once a mean grows far past the step size the actions
//! saturate and the score-function signal fades; long runs wander.
//!
//! cargo run --release --example svpg_sampler

use adrlab::envs::EnvSpec;
use adrlab::rng::seeded;
use adrlab::stats::mean;
use adrlab::svpg::{Ensemble, SvpgConfig};

fn main() -> adrlab::Result<()> {
    let space = EnvSpec::by_name("point_pusher")?.rand_space;
    let cfg = SvpgConfig {
        particles: 4,
        lr: 3e-3,
        ..SvpgConfig::default()
    };
    let mut ensemble = Ensemble::new(space, cfg, &mut seeded(1))?;
    let mut rng = seeded(2);
    let (mut first, mut second) = (Vec::new(), Vec::new());
    for round in 1..=800 {
        let props = ensemble.propose(&mut rng)?;
        let rewards: Vec<f64> = props.iter().map(|p| p.values()[0]).collect();
        first.extend(props.iter().map(|p| p.values()[0]));
        second.extend(props.iter().map(|p| p.values()[1]));
        ensemble.assign_rewards(&rewards)?;
        ensemble.update()?;
        if round % 100 == 0 {
            println!(
                "rounds {:>4}-{round:<4}  mean proposal  dim0 {:.3}  dim1 {:.3}",
                round - 99,
                mean(&first),
                mean(&second)
            );
            let mus: Vec<String> = ensemble
                .particles()
                .iter()
                .map(|p| format!("{:+.2}", p.mean(&p.state)[0]))
                .collect();
            println!("            policy mean along dim0: {}", mus.join(" "));
            first.clear();
            second.clear();
        }
    }
    Ok(())
}
