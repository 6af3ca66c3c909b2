//! The three environments: dimensions, randomization ranges, and returns of
//! a scripted or random policy at a few parameter settings.
//!
//! cargo run --release --example env_tour

use adrlab::envs::{rollout, EnvSpec};
use adrlab::rng::seeded;
use rand::Rng;

fn main() -> adrlab::Result<()> {
    for name in ["droplander", "point_pusher", "reacher4"] {
        let spec = EnvSpec::by_name(name)?;
        println!("{name}: obs {} act {} episode limit {}", spec.obs_dim, spec.act_dim, spec.episode_limit);
        for d in spec.rand_space.dims() {
            println!("  {:<24} [{}, {}]", d.name, d.low, d.high);
        }
        let mut rng = seeded(3);
        for label in ["low", "default", "high"] {
            let physical: Vec<f64> = match label {
                "low" => spec.rand_space.dims().iter().map(|d| d.low).collect(),
                "high" => spec.rand_space.dims().iter().map(|d| d.high).collect(),
                _ => spec.default_physical(),
            };
            let mut env = spec.make_physical(&physical, 7)?;
            let act_dim = spec.act_dim;
            let traj = rollout(env.as_mut(), |obs| match name {
                // Throttle up when falling fast.
                "droplander" => vec![if obs[1] < -0.25 { 1.0 } else { -0.5 }],
                _ => (0..act_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            });
            let ret: f64 = traj.iter().map(|t| t.r).sum();
            println!("  {label:<8} params {physical:?}: return {ret:9.2} over {} steps", traj.len());
        }
    }
    Ok(())
}
