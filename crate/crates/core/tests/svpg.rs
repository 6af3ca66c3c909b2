use adrlab::envs::EnvSpec;
use adrlab::rng::seeded;
use adrlab::space::{RandConfig, RandSpace};
use adrlab::svpg::{squared_distance, ConstantKernel, Ensemble, Particle, ProposalStep, StepRule, SvpgConfig};
use proptest::prelude::*;
use rand::Rng;

fn space(name: &str) -> RandSpace {
    EnvSpec::by_name(name).unwrap().rand_space
}

fn config(particles: usize, step_rule: StepRule) -> SvpgConfig {
    SvpgConfig {
        particles,
        step_rule,
        hidden: vec![16, 16],
        ..SvpgConfig::default()
    }
}

/// Propose `rounds` times and reward every proposal.
fn play(e: &mut Ensemble, rounds: usize, seed: u64, reward: impl Fn(&RandConfig) -> f64) {
    let mut rng = seeded(seed);
    for _ in 0..rounds {
        let props = e.propose(&mut rng).unwrap();
        let r: Vec<f64> = props.iter().map(&reward).collect();
        e.assign_rewards(&r).unwrap();
    }
}

/// Policy gradients the ensemble will use, computed on clones.
fn expected_gradients(e: &Ensemble) -> Vec<Vec<f64>> {
    e.particles()
        .iter()
        .map(|p| {
            let mut c = p.clone();
            let steps = c.rollout.clone();
            c.a2c_gradient(&steps, e.config().gamma).unwrap().policy
        })
        .collect()
}

fn zero_critic(p: &mut Particle) {
    let last = p.critic.layers_mut().last_mut().unwrap();
    last.weight.map_inplace(|_| 0.0);
    last.bias.map_inplace(|_| 0.0);
}

#[test]
fn single_particle_sgd_step_is_plain_policy_gradient() {
    let cfg = config(1, StepRule::Sgd);
    let lr = cfg.lr;
    let mut e = Ensemble::new(space("reacher4"), cfg, &mut seeded(3)).unwrap();
    play(&mut e, 7, 4, |c| c.values().iter().sum::<f64>() - 4.0);
    let phi0 = e.particles()[0].flat_policy();
    let g = &expected_gradients(&e)[0];
    assert!(g.iter().any(|x| x.abs() > 1e-6));
    e.update().unwrap();
    let phi1 = e.particles()[0].flat_policy();
    for ((a, b), g) in phi1.iter().zip(&phi0).zip(g) {
        assert!((a - (b + lr * g)).abs() < 1e-10);
    }
}

#[test]
fn constant_kernel_averages_gradients() {
    let cfg = config(3, StepRule::Sgd);
    let lr = cfg.lr;
    let mut e = Ensemble::new(space("point_pusher"), cfg, &mut seeded(8))
        .unwrap()
        .with_kernel(Box::new(ConstantKernel));
    play(&mut e, 5, 9, |c| -(c.values()[0] - 0.2).abs());
    let before: Vec<Vec<f64>> = e.particles().iter().map(Particle::flat_policy).collect();
    let grads = expected_gradients(&e);
    let n = grads.len() as f64;
    e.update().unwrap();
    for (p, phi0) in e.particles().iter().zip(&before) {
        for (k, (a, b)) in p.flat_policy().iter().zip(phi0).enumerate() {
            let mean: f64 = grads.iter().map(|g| g[k]).sum::<f64>() / n;
            assert!((a - (b + lr * mean)).abs() < 1e-12);
        }
    }
}

#[test]
fn identical_particles_with_zero_advantage_do_not_move() {
    let mut e = Ensemble::new(space("droplander"), config(2, StepRule::Sgd), &mut seeded(1)).unwrap();
    let template = e.particles()[0].clone();
    for p in e.particles_mut() {
        *p = template.clone();
        zero_critic(p);
    }
    play(&mut e, 3, 2, |_| 0.0);
    let before: Vec<Vec<f64>> = e.particles().iter().map(Particle::flat_policy).collect();
    let up = e.update().unwrap();
    assert!(up.directions.iter().flatten().all(|d| *d == 0.0));
    let after: Vec<Vec<f64>> = e.particles().iter().map(Particle::flat_policy).collect();
    assert_eq!(before, after);
}

#[test]
fn zero_reward_particles_repel_each_other() {
    for rule in [StepRule::Adam, StepRule::Sgd] {
        let mut e = Ensemble::new(space("droplander"), config(2, rule), &mut seeded(21)).unwrap();
        e.particles_mut().iter_mut().for_each(zero_critic);
        let dist = |e: &Ensemble| squared_distance(&e.particles()[0].flat_policy(), &e.particles()[1].flat_policy());
        let mut last = dist(&e);
        for step in 0..10 {
            play(&mut e, 1, 100 + step, |_| 0.0);
            e.update().unwrap();
            let d = dist(&e);
            assert!(d > last, "{rule:?} step {step}: {d} <= {last}");
            last = d;
        }
    }
}

fn one_step(state: f64, action: f64, reward: f64) -> ProposalStep {
    let s = RandConfig::new(vec![state]);
    ProposalStep {
        proposal: s.clamp_step(&[action], 0.05).unwrap(),
        state: s,
        action: vec![action],
        reward: Some(reward),
        terminal: true,
    }
}

#[test]
fn reward_offset_matched_by_baseline_leaves_gradient_unchanged() {
    let e = Ensemble::new(space("droplander"), config(1, StepRule::Sgd), &mut seeded(6)).unwrap();
    let mut p = e.particles()[0].clone();
    let step = one_step(0.4, 0.03, -0.7);
    let g = p.a2c_gradient(&[step.clone()], 0.99).unwrap();
    let v = p.value(&step.state);
    assert!((g.advantages[0] - (-0.7 - v)).abs() < 1e-15);

    for c in [-5.0, 0.25, 3.0] {
        let mut shifted = e.particles()[0].clone();
        shifted.critic.layers_mut().last_mut().unwrap().bias.map_inplace(|b| b + c);
        let gs = shifted.a2c_gradient(&[one_step(0.4, 0.03, -0.7 + c)], 0.99).unwrap();
        assert!((gs.returns[0] - (g.returns[0] + c)).abs() < 1e-12);
        for (a, b) in gs.policy.iter().zip(&g.policy) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn states_and_proposals_stay_in_unit_box(seed in 0u64..10_000, env_idx in 0usize..3) {
        let name = ["droplander", "point_pusher", "reacher4"][env_idx];
        let mut e = Ensemble::new(space(name), config(4, StepRule::Adam), &mut seeded(seed)).unwrap();
        let mut rng = seeded(seed + 1);
        for _ in 0..30 {
            let props = e.propose(&mut rng).unwrap();
            for (p, prop) in e.particles().iter().zip(&props) {
                prop_assert!(prop.values().iter().all(|v| (0.0..=1.0).contains(v)));
                prop_assert!(p.state.values().iter().all(|v| (0.0..=1.0).contains(v)));
                prop_assert!(p.steps_since_reset < e.config().horizon);
            }
            let r: Vec<f64> = props.iter().map(|_| rng.gen_range(-5.0..0.0)).collect();
            e.assign_rewards(&r).unwrap();
            e.update().unwrap();
        }
    }
}
