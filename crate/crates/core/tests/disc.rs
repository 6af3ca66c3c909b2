use adrlab::disc::{Discriminator, Label, LabeledTrajectory, PROB_CEIL, PROB_FLOOR};
use adrlab::nn::Matrix;
use adrlab::rng::seeded;
use adrlab::AdrError;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

const DIM: usize = 5;

fn disc(seed: u64) -> Discriminator {
    Discriminator::new(DIM, &[128, 128], 2e-4, 128, &mut seeded(seed)).unwrap()
}

/// Tuples with an offset along the first coordinate and uniform noise elsewhere.
fn tuples<R: Rng>(n: usize, offset: f64, rng: &mut R) -> Matrix {
    let data = (0..n * DIM)
        .map(|k| {
            let u = rng.gen_range(-0.5..0.5);
            if k % DIM == 0 { offset + u } else { 2.0 * u }
        })
        .collect();
    Matrix::from_vec(n, DIM, data).unwrap()
}

fn scored(label: Label, m: Matrix, d: &Discriminator) -> LabeledTrajectory {
    let mut t = LabeledTrajectory::from_tuples(label, m).unwrap();
    if label == Label::Randomized {
        d.score(&mut t).unwrap();
    }
    t
}

#[test]
fn separable_tuples_are_learned_within_200_steps() {
    let mut d = disc(1);
    let mut rng = seeded(2);
    for _ in 0..200 {
        let pos = vec![scored(Label::Randomized, tuples(64, 1.0, &mut rng), &d)];
        let neg = vec![scored(Label::Reference, tuples(64, -1.0, &mut rng), &d)];
        d.train_step(&pos, &neg, &mut rng).unwrap();
    }
    let acc = d.accuracy(&tuples(2000, 1.0, &mut rng), &tuples(2000, -1.0, &mut rng)).unwrap();
    assert!(acc > 0.95, "accuracy {acc}");
}

#[test]
fn identical_distributions_stay_near_chance() {
    let mut d = disc(3);
    let mut rng = seeded(4);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let draw = |rng: &mut adrlab::rng::Rng, n: usize| {
        Matrix::from_vec(n, DIM, (0..n * DIM).map(|_| normal.sample(rng)).collect()).unwrap()
    };
    for step in 1..=1000 {
        let pos = vec![scored(Label::Randomized, draw(&mut rng, 64), &d)];
        let neg = vec![scored(Label::Reference, draw(&mut rng, 64), &d)];
        d.train_step(&pos, &neg, &mut rng).unwrap();
        if step % 50 == 0 {
            let acc = d.accuracy(&draw(&mut rng, 2000), &draw(&mut rng, 2000)).unwrap();
            assert!((0.4..=0.6).contains(&acc), "step {step}: accuracy {acc}");
        }
    }
}

#[test]
fn half_confident_trajectory_scores_log_half() {
    let probs = vec![0.5; 37];
    let r = Discriminator::reward_from_probabilities(&probs).unwrap();
    assert!((r - 0.5f64.ln()).abs() < 1e-12);

    // A network whose logit is identically zero outputs 0.5 everywhere.
    let mut d = disc(5);
    let last = d.net.layers_mut().last_mut().unwrap();
    last.weight.map_inplace(|_| 0.0);
    last.bias.map_inplace(|_| 0.0);
    let mut t = LabeledTrajectory::from_tuples(Label::Randomized, tuples(20, 0.3, &mut seeded(6))).unwrap();
    assert!((d.score(&mut t).unwrap() - 0.5f64.ln()).abs() < 1e-12);
}

#[test]
fn training_on_unscored_randomized_tuples_is_rejected() {
    let mut d = disc(7);
    let mut rng = seeded(8);
    let ok = scored(Label::Randomized, tuples(10, 1.0, &mut rng), &d);
    let unscored = LabeledTrajectory::from_tuples(Label::Randomized, tuples(10, 1.0, &mut rng)).unwrap();
    let neg = vec![scored(Label::Reference, tuples(10, -1.0, &mut rng), &d)];
    let before = d.clone();
    let err = d.train_step(&[ok, unscored], &neg, &mut rng).unwrap_err();
    assert!(matches!(err, AdrError::Contract(_)), "{err}");
    assert_eq!(d, before, "a rejected step must not touch the network");
}

/// Rollouts of an environment that behaves like the reference versus one
/// whose dynamics shift the observed tuples.
#[test]
fn distinguishable_environment_earns_higher_reward() {
    let mut d = disc(9);
    let mut rng = seeded(10);
    for _ in 0..300 {
        // Randomized rollouts come from both environments, reference from one.
        let pos = vec![
            scored(Label::Randomized, tuples(32, 0.0, &mut rng), &d),
            scored(Label::Randomized, tuples(32, 1.5, &mut rng), &d),
        ];
        let neg = vec![scored(Label::Reference, tuples(64, 0.0, &mut rng), &d)];
        d.train_step(&pos, &neg, &mut rng).unwrap();
    }
    let mut far = LabeledTrajectory::from_tuples(Label::Randomized, tuples(200, 1.5, &mut rng)).unwrap();
    let mut same = LabeledTrajectory::from_tuples(Label::Randomized, tuples(200, 0.0, &mut rng)).unwrap();
    let (rf, rs) = (d.score(&mut far).unwrap(), d.score(&mut same).unwrap());
    assert!(rf > rs + 0.1, "distinguishable {rf} vs identical {rs}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reward_is_monotone_in_tuple_confidence(
        pairs in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..40),
    ) {
        let hi: Vec<f64> = pairs.iter().map(|(a, b)| a.max(*b)).collect();
        let lo: Vec<f64> = pairs.iter().map(|(a, b)| a.min(*b)).collect();
        let rh = Discriminator::reward_from_probabilities(&hi).unwrap();
        let rl = Discriminator::reward_from_probabilities(&lo).unwrap();
        prop_assert!(rh >= rl);
    }

    #[test]
    fn reward_stays_within_clamp(
        probs in prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0], 1..40),
        seed in 0u64..1000,
        scale in 0.0f64..200.0,
    ) {
        let r = Discriminator::reward_from_probabilities(&probs).unwrap();
        prop_assert!(r >= PROB_FLOOR.ln() && r <= PROB_CEIL.ln());
        prop_assert!(r < 0.0);

        // Extreme inputs through a real network respect the same bounds.
        let d = disc(seed);
        let mut rng = seeded(seed);
        let mut t = LabeledTrajectory::from_tuples(Label::Randomized, tuples(8, scale, &mut rng)).unwrap();
        let s = d.score(&mut t).unwrap();
        prop_assert!(s >= PROB_FLOOR.ln() && s <= PROB_CEIL.ln());
    }
}
