use adrlab::envs::EnvSpec;
use adrlab::eval::{
    compare, evaluate_generalization, hard_region_curve, sampling_histogram, CurveRow, EvalGrid, GenRow,
    ProposalRow, RunMeta, RunReport,
};
use adrlab::policy::{run_episode, FnPolicy};
use adrlab::rng::{derive_indexed, seeded};
use adrlab::stats::chi_square_uniform;
use adrlab::AdrError;
use proptest::prelude::*;
use rand::Rng;

fn lander_cells() -> Vec<String> {
    (8..=20).map(|m| format!("mes={m}")).collect()
}

/// A droplander report whose cell means are `base + mes` at every eval.
fn synthetic(mode: &str, seed: u64, base: f64, proposals: Vec<ProposalRow>) -> RunReport {
    let cells = lander_cells();
    let mut learning_curve = Vec::new();
    for t in [0u64, 1000, 2000] {
        for (k, c) in cells.iter().enumerate() {
            learning_curve.push(CurveRow {
                timestep: t,
                seed,
                env_cell: c.clone(),
                mean_return: base + (8 + k) as f64 + t as f64 / 1000.0,
                std_return: Some(1.5),
            });
        }
    }
    let generalization = cells
        .iter()
        .enumerate()
        .map(|(k, c)| GenRow {
            cell: c.clone(),
            params: vec![(8 + k) as f64],
            mean: base + (8 + k) as f64,
            std: None,
            n: 1,
        })
        .collect();
    RunReport {
        meta: RunMeta {
            mode: mode.into(),
            env: "droplander".into(),
            seed,
            config_hash: "00".into(),
            version: "test".into(),
            rand_space_used: mode != "baseline",
            dims: vec!["main_engine_strength".into()],
            max_timesteps: 2000,
            timesteps: 2000,
            eval_every: 1000,
            hist_bins: 20,
            completed: true,
            error: None,
            config: serde_json::json!({}),
        },
        learning_curve,
        generalization,
        proposals,
    }
}

#[test]
fn uniform_proposals_give_near_uniform_bins() {
    let mut rng = seeded(1);
    let proposals = (0..5000)
        .map(|i| ProposalRow {
            timestep: i / 10 * 4,
            particle: (i % 10) as usize,
            values: vec![rng.gen::<f64>()],
        })
        .collect();
    let r = synthetic("adr", 1, 0.0, proposals);
    let rows = sampling_histogram(&r, 100_000, 20).unwrap();
    assert_eq!(rows.len(), 20);
    let counts: Vec<u64> = rows.iter().map(|h| h.count).collect();
    assert_eq!(counts.iter().sum::<u64>(), 5000);
    assert!(chi_square_uniform(&counts).1 > 0.01);
}

#[test]
fn histogram_buckets_by_timestep() {
    let rows = vec![
        ProposalRow { timestep: 0, particle: 0, values: vec![0.0] },
        ProposalRow { timestep: 999, particle: 1, values: vec![1.0] },
        ProposalRow { timestep: 2500, particle: 0, values: vec![0.51] },
    ];
    let h = sampling_histogram(&synthetic("adr", 1, 0.0, rows), 1000, 4).unwrap();
    // Three buckets (the empty middle one included), four bins each.
    assert_eq!(h.len(), 12);
    let count = |start: u64, bin: usize| h.iter().find(|r| r.bucket_start == start && r.bin == bin).unwrap().count;
    assert_eq!((count(0, 0), count(0, 3)), (1, 1));
    assert!((0..4).all(|b| count(1000, b) == 0));
    assert_eq!(count(2000, 2), 1);
}

#[test]
fn histogram_of_a_run_without_sampler_is_an_error() {
    let r = synthetic("udr", 1, 0.0, Vec::new());
    assert!(matches!(sampling_histogram(&r, 1000, 20), Err(AdrError::NoProposals(_))));
}

#[test]
fn hard_curve_matches_hand_computation() {
    let hard: Vec<String> = (8..=11).map(|m| format!("mes={m}")).collect();
    let a = synthetic("adr", 1, 0.0, Vec::new());
    let b = synthetic("adr", 2, 10.0, Vec::new());
    let curve = hard_region_curve(&[a, b], &hard).unwrap();
    assert_eq!(curve.len(), 3);
    for p in &curve {
        // Per run: mean of base + 8..=11 + t/1000 = base + 9.5 + t/1000.
        let t = p.timestep as f64 / 1000.0;
        let (ra, rb) = (9.5 + t, 19.5 + t);
        assert!((p.mean - (ra + rb) / 2.0).abs() < 1e-12);
        let sd = ((ra - rb) * (ra - rb) / 2.0f64).sqrt();
        assert!((p.std.unwrap() - sd).abs() < 1e-12);
        assert_eq!(p.n, 2);
    }
    let missing = hard_region_curve(&[synthetic("adr", 1, 0.0, Vec::new())], &["mes=99".to_string()]);
    assert!(matches!(missing, Err(AdrError::MissingCells(c)) if c == vec!["mes=99".to_string()]));
}

#[test]
fn compare_groups_methods_and_orders_deterministically() {
    let mut reports = Vec::new();
    for seed in [5, 3, 1, 4, 2] {
        reports.push(synthetic("udr", seed, -(seed as f64), Vec::new()));
        reports.push(synthetic("adr", seed, seed as f64, Vec::new()));
    }
    let out = compare(&reports).unwrap();
    assert_eq!(out.summaries.len(), 2);
    assert_eq!(out.summaries[0].method, "adr");
    assert_eq!(out.summaries[0].seeds, vec![1, 2, 3, 4, 5]);
    // Grid mean per run = base + 14; hard mean = base + 9.5.
    let adr = &out.summaries[0];
    let udr = &out.summaries[1];
    assert!((adr.grid_mean - 17.0).abs() < 1e-12);
    assert!((udr.grid_mean - 11.0).abs() < 1e-12);
    assert!((adr.hard_mean - 12.5).abs() < 1e-12);
    assert!((udr.delta_grid + 6.0).abs() < 1e-12 && adr.delta_grid == 0.0);
    let keys: Vec<(String, u64, u64)> = out.curves.iter().map(|(m, r)| (m.clone(), r.seed, r.timestep)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);

    reports.reverse();
    assert_eq!(compare(&reports).unwrap(), out);

    let mut other = synthetic("udr", 9, 0.0, Vec::new());
    other.meta.env = "point_pusher".into();
    assert!(compare(&[reports[0].clone(), other]).is_err());
}

#[test]
fn compare_of_a_run_with_itself_has_zero_deltas() {
    let r = synthetic("adr", 1, 3.0, Vec::new());
    let out = compare(&[r.clone(), r]).unwrap();
    assert_eq!(out.summaries.len(), 1);
    assert_eq!((out.summaries[0].delta_grid, out.summaries[0].delta_hard), (0.0, 0.0));
}

#[test]
fn single_reference_cell_equals_plain_evaluation() {
    let spec = EnvSpec::by_name("droplander").unwrap();
    let policy = FnPolicy::new(2, 1, |o: &[f64]| vec![if o[1] < -0.2 { 1.0 } else { -0.3 }]);
    let grid = EvalGrid::single("ref", spec.default_physical(), 3);
    let res = evaluate_generalization(&policy, &spec, &grid, 99).unwrap();

    let mut env = spec.make_physical(&spec.default_physical(), derive_indexed(99, "eval", 0)).unwrap();
    let mut rng = seeded(0);
    let plain: Vec<f64> = (0..3)
        .map(|_| run_episode(env.as_mut(), &policy, false, &mut rng).iter().map(|t| t.r).sum())
        .collect();
    assert_eq!(res.len(), 1);
    assert_eq!(res[0].returns, plain);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reports_round_trip_through_disk(
        seed in 0u64..1000,
        base in -500.0f64..500.0,
        vals in prop::collection::vec(0.0f64..=1.0, 1..50),
    ) {
        let proposals = vals
            .iter()
            .enumerate()
            .map(|(i, v)| ProposalRow { timestep: i as u64 * 7, particle: i % 3, values: vec![*v] })
            .collect();
        let mut r = synthetic("adr", seed, base, proposals);
        r.generalization[0].std = Some(base.abs() / 3.0);
        let dir = tempfile::tempdir().unwrap();
        r.write(dir.path()).unwrap();
        prop_assert_eq!(RunReport::read(dir.path()).unwrap(), r);
    }
}
