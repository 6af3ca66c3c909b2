use adrlab::rng::seeded;
use adrlab::svpg::{RbfMedian, SteinKernel};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded(seed);
    let scale = rng.gen_range(0.01..10.0);
    (0..n)
        .map(|_| (0..dim).map(|_| scale * rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

/// Median over every ordered pair (each distance appears twice), which has
/// the same median as the unordered pairs.
fn brute_force_bandwidth(points: &[Vec<f64>]) -> f64 {
    let mut d = Vec::new();
    for (i, x) in points.iter().enumerate() {
        for (j, y) in points.iter().enumerate() {
            if i != j {
                d.push(y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>());
            }
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = d.len() / 2;
    let med = (d[m - 1] + d[m]) / 2.0;
    med / ((points.len() + 1) as f64).ln()
}

#[test]
fn gram_is_positive_semidefinite_on_hundred_point_sets() {
    let mut worst = f64::INFINITY;
    for set in 0..100u64 {
        let n = 2 + (set as usize % 14);
        let dim = 1 + (set as usize * 7 % 40);
        let pts = random_points(n, dim, set);
        let gram = RbfMedian.evaluate(&pts).gram;
        let m = DMatrix::from_fn(n, n, |i, j| gram[i][j]);
        let min = m.symmetric_eigen().eigenvalues.min();
        worst = worst.min(min);
        assert!(min >= -1e-8, "set {set}: min eigenvalue {min}");
    }
    assert!(worst >= -1e-8);
}

#[test]
fn bandwidth_matches_brute_force_exactly() {
    for set in 0..100u64 {
        let pts = random_points(2 + set as usize % 15, 1 + set as usize % 9, 500 + set);
        assert_eq!(RbfMedian::bandwidth(&pts), brute_force_bandwidth(&pts), "set {set}");
    }
}

proptest! {
    #[test]
    fn gram_symmetric_with_unit_diagonal(n in 1usize..10, dim in 1usize..20, seed in 0u64..100_000) {
        let pts = random_points(n, dim, seed);
        let gram = RbfMedian.evaluate(&pts).gram;
        for i in 0..n {
            prop_assert_eq!(gram[i][i], 1.0);
            for j in 0..n {
                prop_assert_eq!(gram[i][j], gram[j][i]);
                prop_assert!(gram[i][j] > 0.0 && gram[i][j] <= 1.0);
            }
        }
    }

    #[test]
    fn self_kernel_is_one(dim in 1usize..30, seed in 0u64..100_000, h in 1e-3f64..1e3) {
        let x = &random_points(1, dim, seed)[0];
        prop_assert_eq!(RbfMedian::value(x, x, h), 1.0);
        prop_assert!(RbfMedian::grad_x(x, x, h).iter().all(|g| *g == 0.0));
    }
}
