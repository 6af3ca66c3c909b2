//! Generalization sweeps, hard-region learning curves and sampling
//! histograms.

mod report;

use rayon::prelude::*;

pub use report::{
    compare, hard_region_curve, sampling_histogram, CompareOutput, CurvePoint, CurveRow, GenRow,
    HistRow, MethodSummary, ProposalRow, RunMeta, RunReport,
};

use crate::envs::{EnvKind, EnvSpec};
use crate::error::Result;
use crate::policy::{run_episode, Policy};
use crate::rng::{derive_indexed, seeded};
use crate::stats;

/// Per-dimension points of the PointPusher test grid (multipliers of the
/// default). Values below the training box extrapolate.
pub const PUSHER_POINTS: [f64; 5] = [0.5, 0.67, 0.78, 0.89, 1.0];

#[derive(Clone, Debug, PartialEq)]
pub struct EvalCell {
    pub id: String,
    pub physical: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalGrid {
    pub cells: Vec<EvalCell>,
    /// Episodes per cell, each from a fresh reset.
    pub resets: usize,
}

fn fmt_point(x: f64) -> String {
    format!("{x}")
}

impl EvalGrid {
    /// The default sweep for an environment.
    pub fn for_env(spec: &EnvSpec, resets: usize) -> Self {
        let cells = match spec.kind {
            EnvKind::Droplander => {
                let lo = spec.rand_space.dims()[0].low.ceil() as i64;
                let hi = spec.rand_space.dims()[0].high.floor() as i64;
                (lo..=hi)
                    .map(|m| EvalCell {
                        id: format!("mes={m}"),
                        physical: vec![m as f64],
                    })
                    .collect()
            }
            EnvKind::PointPusher => {
                let mut cells = Vec::with_capacity(25);
                for f in PUSHER_POINTS {
                    for d in PUSHER_POINTS {
                        cells.push(EvalCell {
                            id: format!("friction={}/damping={}", fmt_point(f), fmt_point(d)),
                            physical: vec![f, d],
                        });
                    }
                }
                cells
            }
            EnvKind::Reacher4 => {
                let setting = |id: &str, damping: f64, torque: f64| EvalCell {
                    id: id.into(),
                    physical: [[damping; 4], [torque; 4]].concat(),
                };
                vec![
                    setting("easy", 2.0, 4.0),
                    setting("ref", 1.0, 1.0),
                    setting("hard", 0.2, 1.0),
                ]
            }
        };
        Self { cells, resets }
    }

    /// One cell at explicit physical parameters.
    pub fn single(id: &str, physical: Vec<f64>, resets: usize) -> Self {
        Self {
            cells: vec![EvalCell {
                id: id.into(),
                physical,
            }],
            resets,
        }
    }

    /// Cell ids of the difficult region: MES in `[8, 11]` for Droplander,
    /// cells outside the training box for PointPusher, `hard` for Reacher4.
    pub fn hard_cells(&self, spec: &EnvSpec) -> Vec<String> {
        self.cells
            .iter()
            .filter(|c| match spec.kind {
                EnvKind::Droplander => c.physical[0] <= 11.0,
                EnvKind::PointPusher => spec
                    .rand_space
                    .dims()
                    .iter()
                    .zip(&c.physical)
                    .any(|(d, x)| *x < d.low || *x > d.high),
                EnvKind::Reacher4 => c.id == "hard",
            })
            .map(|c| c.id.clone())
            .collect()
    }
}

/// Returns of every episode in one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub cell: EvalCell,
    pub returns: Vec<f64>,
    pub lengths: Vec<usize>,
}

impl CellResult {
    pub fn mean(&self) -> f64 {
        stats::mean(&self.returns)
    }

    pub fn std(&self) -> Option<f64> {
        stats::std_dev(&self.returns)
    }
}

/// Evaluate a policy without exploration on every grid cell. Cells run in
/// parallel; each draws its resets from its own stream, so results do not
/// depend on scheduling.
pub fn evaluate_generalization(
    policy: &dyn Policy,
    spec: &EnvSpec,
    grid: &EvalGrid,
    eval_seed: u64,
) -> Result<Vec<CellResult>> {
    grid.cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let mut env = spec.make_physical(&cell.physical, derive_indexed(eval_seed, "eval", i as u64))?;
            let mut rng = seeded(0);
            let mut returns = Vec::with_capacity(grid.resets);
            let mut lengths = Vec::with_capacity(grid.resets);
            for _ in 0..grid.resets {
                let traj = run_episode(env.as_mut(), policy, false, &mut rng);
                returns.push(traj.iter().map(|t| t.r).sum());
                lengths.push(traj.len());
            }
            Ok(CellResult {
                cell: cell.clone(),
                returns,
                lengths,
            })
        })
        .collect()
}
