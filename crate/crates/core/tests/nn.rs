use adrlab::nn::{soft_update, Activation, Init, Matrix, Mlp};
use adrlab::rng::seeded;
use proptest::prelude::*;
use rand::Rng;

const ACTIVATIONS: [Activation; 4] = [
    Activation::Identity,
    Activation::Tanh,
    Activation::Relu,
    Activation::Sigmoid,
];

fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// `Σ output ⊙ weights`, so the upstream gradient is `weights` itself.
fn probe_loss(net: &Mlp, x: &Matrix, weights: &Matrix) -> f64 {
    net.predict(x).unwrap().hadamard(weights).unwrap().sum()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-6)
}

#[test]
fn backward_matches_central_differences_on_fifty_nets() {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for case in 0..50u64 {
        let mut rng = seeded(1000 + case);
        let depth = rng.gen_range(1..4);
        let mut sizes = vec![rng.gen_range(1..6)];
        for _ in 0..depth {
            sizes.push(rng.gen_range(1..7));
        }
        let hidden = ACTIVATIONS[rng.gen_range(1..4)];
        let output = ACTIVATIONS[rng.gen_range(0..4)];
        let init = if case % 2 == 0 {
            Init::UniformFanIn
        } else {
            Init::Orthogonal {
                hidden_gain: 1.0,
                output_gain: 1.0,
            }
        };
        let mut net = Mlp::new(&sizes, hidden, output, init, &mut rng).unwrap();
        // Non-zero biases so every coordinate is exercised.
        for layer in net.layers_mut() {
            for b in layer.bias.data_mut() {
                *b = rng.gen_range(-0.5..0.5);
            }
        }
        let batch = rng.gen_range(1..5);
        let x = random_matrix(batch, sizes[0], &mut rng);
        let w = random_matrix(batch, *sizes.last().unwrap(), &mut rng);

        net.forward(&x).unwrap();
        let grads = net.backward(&w).unwrap();
        let analytic = grads.flatten();
        let base = net.flat_params();
        for (k, a) in analytic.iter().enumerate() {
            let mut plus = base.clone();
            plus[k] += h;
            let mut minus = base.clone();
            minus[k] -= h;
            let mut probe = net.clone();
            probe.set_flat_params(&plus).unwrap();
            let fp = probe_loss(&probe, &x, &w);
            probe.set_flat_params(&minus).unwrap();
            let fm = probe_loss(&probe, &x, &w);
            let numeric = (fp - fm) / (2.0 * h);
            let e = rel_err(*a, numeric);
            worst = worst.max(e);
            assert!(e < 1e-4, "case {case} param {k}: analytic {a} numeric {numeric}");
        }
        for r in 0..batch {
            for c in 0..sizes[0] {
                let mut xp = x.clone();
                xp.set(r, c, x.get(r, c) + h);
                let mut xm = x.clone();
                xm.set(r, c, x.get(r, c) - h);
                let numeric = (probe_loss(&net, &xp, &w) - probe_loss(&net, &xm, &w)) / (2.0 * h);
                let a = grads.input.get(r, c);
                assert!(rel_err(a, numeric) < 1e-4, "case {case} input ({r},{c}): {a} vs {numeric}");
            }
        }
    }
    assert!(worst < 1e-4);
}

#[test]
fn two_layer_tanh_matches_straight_line_evaluation() {
    let mut rng = seeded(5);
    let net = Mlp::new(&[3, 4, 2], Activation::Tanh, Activation::Identity, Init::UniformFanIn, &mut rng).unwrap();
    let x = [0.3, -0.7, 1.1];
    let (l1, l2) = (&net.layers()[0], &net.layers()[1]);
    let mut hidden = [0.0; 4];
    for (j, hj) in hidden.iter_mut().enumerate() {
        let mut z = l1.bias.get(0, j);
        for (i, xi) in x.iter().enumerate() {
            z += xi * l1.weight.get(i, j);
        }
        *hj = z.tanh();
    }
    let mut expected = [0.0; 2];
    for (k, ek) in expected.iter_mut().enumerate() {
        let mut z = l2.bias.get(0, k);
        for (j, hj) in hidden.iter().enumerate() {
            z += hj * l2.weight.get(j, k);
        }
        *ek = z;
    }
    let out = net.predict(&Matrix::row(&x)).unwrap();
    for k in 0..2 {
        assert!((out.get(0, k) - expected[k]).abs() < 1e-14);
    }
}

#[test]
fn two_soft_updates_match_closed_form() {
    let mut rng = seeded(9);
    let mut target = Mlp::new(&[2, 3, 1], Activation::Relu, Activation::Identity, Init::UniformFanIn, &mut rng).unwrap();
    let t0 = target.flat_params();
    let mut source = target.clone();
    let s: Vec<f64> = (0..t0.len()).map(|i| i as f64 * 0.1 - 0.4).collect();
    source.set_flat_params(&s).unwrap();
    let tau = 0.005;
    soft_update(&mut target, &source, tau).unwrap();
    soft_update(&mut target, &source, tau).unwrap();
    for ((t, t0), s) in target.flat_params().iter().zip(&t0).zip(&s) {
        let want = (1.0 - tau) * (1.0 - tau) * t0 + tau * (2.0 - tau) * s;
        assert!((t - want).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orthogonal_layers_have_orthonormal_rows_or_columns(
        sizes in prop::collection::vec(1usize..12, 2..5),
        gain in 0.1f64..3.0,
        seed in 0u64..10_000,
    ) {
        let init = Init::Orthogonal { hidden_gain: gain, output_gain: gain };
        let net = Mlp::new(&sizes, Activation::Tanh, Activation::Identity, init, &mut seeded(seed)).unwrap();
        for layer in net.layers() {
            let w = &layer.weight;
            // Gram of the shorter side is gain² · I.
            let gram = if w.rows() <= w.cols() { w.matmul_t(w).unwrap() } else { w.t_matmul(w).unwrap() };
            for i in 0..gram.rows() {
                for j in 0..gram.cols() {
                    let want = if i == j { gain * gain } else { 0.0 };
                    prop_assert!((gram.get(i, j) - want).abs() < 1e-5 * gain * gain.max(1.0));
                }
            }
        }
    }

    #[test]
    fn forward_is_deterministic(seed in 0u64..10_000, rows in 1usize..6) {
        let mut rng = seeded(seed);
        let mut net = Mlp::new(&[4, 8, 3], Activation::Relu, Activation::Tanh, Init::UniformFanIn, &mut rng).unwrap();
        let x = random_matrix(rows, 4, &mut rng);
        let a = net.forward(&x).unwrap();
        let b = net.forward(&x).unwrap();
        let c = net.predict(&x).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &c);
    }
}
