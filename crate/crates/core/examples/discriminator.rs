//! Train the discriminator on a fixed controller's rollouts: reference
//! episodes use the default engine, randomized ones a weak or strong engine.
//! Afterwards the weak engine, whose descent looks least like the reference,
//! earns the highest reward. Strong engines sit only slightly above the
//! reference because this controller makes their tuples look alike.
//!
//! cargo run --release --example discriminator

use adrlab::disc::{Discriminator, Label, LabeledTrajectory};
use adrlab::envs::{rollout, EnvSpec, Transition};
use adrlab::rng::seeded;

fn episode(spec: &EnvSpec, mes: f64, seed: u64) -> adrlab::Result<Vec<Transition>> {
    let mut env = spec.make_physical(&[mes], seed)?;
    Ok(rollout(env.as_mut(), |obs| vec![if obs[1] < -0.25 { 1.0 } else { -0.5 }]))
}

fn main() -> adrlab::Result<()> {
    let spec = EnvSpec::by_name("droplander")?;
    let reference = spec.default_physical()[0];
    let mut disc = Discriminator::for_env(spec.obs_dim, spec.act_dim, &mut seeded(0))?;
    let mut rng = seeded(1);
    for it in 0..5000u64 {
        let mut rand = Vec::new();
        let mut refs = Vec::new();
        for (k, mes) in [8.0, 13.0, 20.0].into_iter().enumerate() {
            let s = it * 3 + k as u64;
            let mut t = LabeledTrajectory::from_transitions(Label::Randomized, &episode(&spec, mes, s)?)?;
            disc.score(&mut t)?;
            rand.push(t);
            refs.push(LabeledTrajectory::from_transitions(Label::Reference, &episode(&spec, reference, s)?)?);
        }
        disc.train_step(&rand, &refs, &mut rng)?;
    }
    println!("MES   reward");
    for mes in [8.0, 10.0, 12.0, 13.0, 14.0, 17.0, 20.0] {
        let r = disc.score_trajectory(&episode(&spec, mes, 10_000)?)?;
        println!("{mes:>4}  {r:8.4}");
    }
    Ok(())
}
