//! Run reports: in-memory form, CSV/JSON persistence, and the analyses that
//! read them back.
//!
//! Files written per run directory:
//!
//! | file | columns |
//! |------|---------|
//! | `learning_curve.csv` | `timestep, seed, env_cell, mean_return, std_return` |
//! | `generalization.csv` | `cell, <one column per randomized dim>, mean, std, n` |
//! | `sampling_hist.csv` | `bucket_start, dim, bin, count` |
//! | `proposals.csv` | `timestep, particle, <one column per dim, normalized>` |
//! | `run.json` | metadata, see [`RunMeta`] |
//!
//! An empty std field means fewer than two samples.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalGrid;
use crate::envs::EnvSpec;
use crate::error::{AdrError, Result};
use crate::stats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub mode: String,
    pub env: String,
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
    pub rand_space_used: bool,
    pub dims: Vec<String>,
    pub max_timesteps: u64,
    pub timesteps: u64,
    pub eval_every: u64,
    pub hist_bins: usize,
    pub completed: bool,
    pub error: Option<String>,
    pub config: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub timestep: u64,
    pub seed: u64,
    pub env_cell: String,
    pub mean_return: f64,
    pub std_return: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenRow {
    pub cell: String,
    pub params: Vec<f64>,
    pub mean: f64,
    pub std: Option<f64>,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProposalRow {
    pub timestep: u64,
    pub particle: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistRow {
    pub bucket_start: u64,
    pub dim: usize,
    pub bin: usize,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub meta: RunMeta,
    pub learning_curve: Vec<CurveRow>,
    pub generalization: Vec<GenRow>,
    pub proposals: Vec<ProposalRow>,
}

fn csv_err(path: &Path, e: csv::Error) -> AdrError {
    AdrError::Config(format!("{}: {e}", path.display()))
}

fn opt_field(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_f64(path: &Path, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| AdrError::Config(format!("{}: not a number: `{s}`", path.display())))
}

fn parse_opt(path: &Path, s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(path, s).map(Some)
    }
}

impl RunReport {
    /// Write all report files into `dir` (created if needed).
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| AdrError::io(dir, e))?;

        let path = dir.join("learning_curve.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        for row in &self.learning_curve {
            w.serialize(row).map_err(|e| csv_err(&path, e))?;
        }
        if self.learning_curve.is_empty() {
            w.write_record(["timestep", "seed", "env_cell", "mean_return", "std_return"])
                .map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(|e| AdrError::io(&path, e))?;

        let path = dir.join("generalization.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        let mut header = vec!["cell".to_string()];
        header.extend(self.meta.dims.iter().cloned());
        header.extend(["mean", "std", "n"].map(String::from));
        w.write_record(&header).map_err(|e| csv_err(&path, e))?;
        for row in &self.generalization {
            let mut rec = vec![row.cell.clone()];
            rec.extend(row.params.iter().map(f64::to_string));
            rec.push(row.mean.to_string());
            rec.push(opt_field(row.std));
            rec.push(row.n.to_string());
            w.write_record(&rec).map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(|e| AdrError::io(&path, e))?;

        let path = dir.join("proposals.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        let mut header = vec!["timestep".to_string(), "particle".to_string()];
        header.extend(self.meta.dims.iter().cloned());
        w.write_record(&header).map_err(|e| csv_err(&path, e))?;
        for p in &self.proposals {
            let mut rec = vec![p.timestep.to_string(), p.particle.to_string()];
            rec.extend(p.values.iter().map(f64::to_string));
            w.write_record(&rec).map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(|e| AdrError::io(&path, e))?;

        // Header-only for modes without a sampler.
        let hist = sampling_histogram(self, self.meta.eval_every, self.meta.hist_bins).unwrap_or_default();
        let path = dir.join("sampling_hist.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        w.write_record(["bucket_start", "dim", "bin", "count"])
            .map_err(|e| csv_err(&path, e))?;
        for h in &hist {
            w.write_record([
                h.bucket_start.to_string(),
                h.dim.to_string(),
                h.bin.to_string(),
                h.count.to_string(),
            ])
            .map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(|e| AdrError::io(&path, e))?;

        let path = dir.join("run.json");
        fs::write(&path, serde_json::to_string_pretty(&self.meta)? + "\n")
            .map_err(|e| AdrError::io(&path, e))?;
        Ok(())
    }

    pub fn read(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join("run.json");
        let text = fs::read_to_string(&path).map_err(|e| AdrError::io(&path, e))?;
        let meta: RunMeta = serde_json::from_str(&text)?;
        let d = meta.dims.len();

        let path = dir.join("learning_curve.csv");
        let mut r = csv::Reader::from_path(&path).map_err(|e| csv_err(&path, e))?;
        let learning_curve = r
            .deserialize()
            .collect::<std::result::Result<Vec<CurveRow>, _>>()
            .map_err(|e| csv_err(&path, e))?;

        let path = dir.join("generalization.csv");
        let mut r = csv::Reader::from_path(&path).map_err(|e| csv_err(&path, e))?;
        let mut generalization = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| csv_err(&path, e))?;
            if rec.len() != d + 4 {
                return Err(AdrError::Config(format!(
                    "{}: expected {} columns, found {}",
                    path.display(),
                    d + 4,
                    rec.len()
                )));
            }
            let params = (1..=d).map(|i| parse_f64(&path, &rec[i])).collect::<Result<_>>()?;
            generalization.push(GenRow {
                cell: rec[0].to_string(),
                params,
                mean: parse_f64(&path, &rec[d + 1])?,
                std: parse_opt(&path, &rec[d + 2])?,
                n: rec[d + 3]
                    .parse()
                    .map_err(|_| AdrError::Config(format!("{}: bad n", path.display())))?,
            });
        }

        let path = dir.join("proposals.csv");
        let mut proposals = Vec::new();
        if path.exists() {
            let mut r = csv::Reader::from_path(&path).map_err(|e| csv_err(&path, e))?;
            for rec in r.records() {
                let rec = rec.map_err(|e| csv_err(&path, e))?;
                let bad = || AdrError::Config(format!("{}: malformed row", path.display()));
                if rec.len() != d + 2 {
                    return Err(bad());
                }
                proposals.push(ProposalRow {
                    timestep: rec[0].parse().map_err(|_| bad())?,
                    particle: rec[1].parse().map_err(|_| bad())?,
                    values: (2..d + 2).map(|i| parse_f64(&path, &rec[i])).collect::<Result<_>>()?,
                });
            }
        }
        Ok(Self {
            meta,
            learning_curve,
            generalization,
            proposals,
        })
    }

    /// Mean of the per-cell means of the final generalization grid.
    pub fn grid_mean(&self) -> f64 {
        stats::mean(&self.generalization.iter().map(|g| g.mean).collect::<Vec<_>>())
    }

    /// Mean of the final per-cell means restricted to `cells`.
    pub fn grid_mean_over(&self, cells: &[String]) -> Result<f64> {
        let missing: Vec<String> = cells
            .iter()
            .filter(|c| !self.generalization.iter().any(|g| &g.cell == *c))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(AdrError::MissingCells(missing));
        }
        let vals: Vec<f64> = self
            .generalization
            .iter()
            .filter(|g| cells.contains(&g.cell))
            .map(|g| g.mean)
            .collect();
        Ok(stats::mean(&vals))
    }
}

/// Per time bucket and dimension, counts of proposals over `bins` equal bins
/// of `[0, 1]`. Buckets run from 0 to the last proposal with no gaps.
pub fn sampling_histogram(report: &RunReport, bucket: u64, bins: usize) -> Result<Vec<HistRow>> {
    if report.proposals.is_empty() {
        return Err(AdrError::NoProposals(report.meta.mode.clone()));
    }
    if bucket == 0 || bins == 0 {
        return Err(AdrError::Config("bucket size and bin count must be positive".into()));
    }
    let d = report.proposals[0].values.len();
    let last = report.proposals.iter().map(|p| p.timestep).max().unwrap_or(0);
    let n_buckets = (last / bucket + 1) as usize;
    let mut counts = vec![vec![vec![0u64; bins]; d]; n_buckets];
    for p in &report.proposals {
        let b = (p.timestep / bucket) as usize;
        for (dim, v) in p.values.iter().enumerate() {
            let h = stats::histogram_unit([*v], bins);
            let bin = h.iter().position(|&c| c == 1).unwrap();
            counts[b][dim][bin] += 1;
        }
    }
    let mut rows = Vec::with_capacity(n_buckets * d * bins);
    for (b, per_dim) in counts.into_iter().enumerate() {
        for (dim, per_bin) in per_dim.into_iter().enumerate() {
            for (bin, count) in per_bin.into_iter().enumerate() {
                rows.push(HistRow {
                    bucket_start: b as u64 * bucket,
                    dim,
                    bin,
                    count,
                });
            }
        }
    }
    Ok(rows)
}

/// A point on a learning curve aggregated across runs.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub timestep: u64,
    pub mean: f64,
    pub std: Option<f64>,
    pub n: usize,
}

/// Learning curve restricted to `cells`: per run, the mean over those cells
/// at each evaluation; then mean ± std across runs per timestep.
pub fn hard_region_curve(reports: &[RunReport], cells: &[String]) -> Result<Vec<CurvePoint>> {
    let mut per_t: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for rep in reports {
        let mut by_t: BTreeMap<u64, BTreeMap<&str, f64>> = BTreeMap::new();
        for row in &rep.learning_curve {
            by_t.entry(row.timestep)
                .or_default()
                .insert(row.env_cell.as_str(), row.mean_return);
        }
        for (t, cellmap) in by_t {
            let missing: Vec<String> = cells
                .iter()
                .filter(|c| !cellmap.contains_key(c.as_str()))
                .cloned()
                .collect();
            if !missing.is_empty() {
                return Err(AdrError::MissingCells(missing));
            }
            let vals: Vec<f64> = cells.iter().map(|c| cellmap[c.as_str()]).collect();
            per_t.entry(t).or_default().push(stats::mean(&vals));
        }
    }
    Ok(per_t
        .into_iter()
        .map(|(timestep, v)| CurvePoint {
            timestep,
            mean: stats::mean(&v),
            std: stats::std_dev(&v),
            n: v.len(),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub seeds: Vec<u64>,
    pub grid_mean: f64,
    pub grid_std: Option<f64>,
    pub hard_mean: f64,
    pub hard_std: Option<f64>,
    /// Differences against the first method in name order.
    pub delta_grid: f64,
    pub delta_hard: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareOutput {
    /// `(method, row)` sorted by method, seed, timestep, cell.
    pub curves: Vec<(String, CurveRow)>,
    pub summaries: Vec<MethodSummary>,
}

impl CompareOutput {
    pub fn table(&self) -> String {
        let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
        let mut s = format!(
            "{:<10} {:>5} {:>12} {:>10} {:>12} {:>10} {:>10} {:>10}\n",
            "method", "seeds", "grid_mean", "grid_std", "hard_mean", "hard_std", "d_grid", "d_hard"
        );
        for m in &self.summaries {
            s.push_str(&format!(
                "{:<10} {:>5} {:>12.3} {:>10} {:>12.3} {:>10} {:>10.3} {:>10.3}\n",
                m.method,
                m.seeds.len(),
                m.grid_mean,
                fmt(m.grid_std),
                m.hard_mean,
                fmt(m.hard_std),
                m.delta_grid,
                m.delta_hard
            ));
        }
        s
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| AdrError::io(dir, e))?;
        let path = dir.join("compare_curves.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        w.write_record(["method", "seed", "timestep", "env_cell", "mean_return", "std_return"])
            .map_err(|e| csv_err(&path, e))?;
        for (m, r) in &self.curves {
            w.write_record([
                m.clone(),
                r.seed.to_string(),
                r.timestep.to_string(),
                r.env_cell.clone(),
                r.mean_return.to_string(),
                opt_field(r.std_return),
            ])
            .map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(|e| AdrError::io(&path, e))?;
        let path = dir.join("compare_summary.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        w.write_record([
            "method", "seeds", "grid_mean", "grid_std", "hard_mean", "hard_std", "delta_grid", "delta_hard",
        ])
        .map_err(|e| csv_err(&path, e))?;
        for m in &self.summaries {
            w.write_record([
                m.method.clone(),
                m.seeds.len().to_string(),
                m.grid_mean.to_string(),
                opt_field(m.grid_std),
                m.hard_mean.to_string(),
                opt_field(m.hard_std),
                m.delta_grid.to_string(),
                m.delta_hard.to_string(),
            ])
            .map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(|e| AdrError::io(&path, e))?;
        Ok(())
    }
}

/// Group runs by mode and summarize their final generalization grids.
pub fn compare(reports: &[RunReport]) -> Result<CompareOutput> {
    if reports.len() < 2 {
        return Err(AdrError::Config("compare needs at least two runs".into()));
    }
    let envs: BTreeSet<&str> = reports.iter().map(|r| r.meta.env.as_str()).collect();
    if envs.len() != 1 {
        return Err(AdrError::Config(format!("runs use different environments: {envs:?}")));
    }
    let spec = EnvSpec::by_name(reports[0].meta.env.as_str())?;
    let hard = EvalGrid::for_env(&spec, 1).hard_cells(&spec);

    let mut groups: BTreeMap<&str, Vec<&RunReport>> = BTreeMap::new();
    for r in reports {
        groups.entry(r.meta.mode.as_str()).or_default().push(r);
    }
    let mut curves = Vec::new();
    let mut summaries: Vec<MethodSummary> = Vec::new();
    for (method, mut runs) in groups {
        runs.sort_by_key(|r| r.meta.seed);
        let mut grid = Vec::new();
        let mut hard_vals = Vec::new();
        for r in &runs {
            grid.push(r.grid_mean());
            hard_vals.push(r.grid_mean_over(&hard)?);
            let mut rows = r.learning_curve.clone();
            rows.sort_by(|a, b| (a.timestep, &a.env_cell).cmp(&(b.timestep, &b.env_cell)));
            curves.extend(rows.into_iter().map(|row| (method.to_string(), row)));
        }
        summaries.push(MethodSummary {
            method: method.to_string(),
            seeds: runs.iter().map(|r| r.meta.seed).collect(),
            grid_mean: stats::mean(&grid),
            grid_std: stats::std_dev(&grid),
            hard_mean: stats::mean(&hard_vals),
            hard_std: stats::std_dev(&hard_vals),
            delta_grid: 0.0,
            delta_hard: 0.0,
        });
    }
    let (g0, h0) = (summaries[0].grid_mean, summaries[0].hard_mean);
    for s in &mut summaries {
        s.delta_grid = s.grid_mean - g0;
        s.delta_hard = s.hard_mean - h0;
    }
    Ok(CompareOutput { curves, summaries })
}
