//! Randomization space: a box of named physical parameter ranges. Everything
//! inside the trainer works on normalized coordinates in `[0, 1]`; physical
//! values only appear when an environment is built and in logs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AdrError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandDim {
    pub name: String,
    pub low: f64,
    pub high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandSpace {
    dims: Vec<RandDim>,
}

impl RandSpace {
    /// Bounds must satisfy `low <= high`. A zero-width dimension is allowed
    /// and pins that parameter (used to express the single-instance baseline
    /// as degenerate uniform randomization).
    pub fn new(dims: Vec<RandDim>) -> Result<Self> {
        if dims.is_empty() {
            return Err(AdrError::Config("randomization space needs at least one dimension".into()));
        }
        for d in &dims {
            if !(d.low.is_finite() && d.high.is_finite()) || d.low > d.high {
                return Err(AdrError::Config(format!(
                    "dimension `{}` has invalid bounds [{}, {}]",
                    d.name, d.low, d.high
                )));
            }
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[RandDim] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.dims.iter().map(|d| d.name.as_str()).collect()
    }

    pub fn config(&self, normalized: Vec<f64>) -> Result<RandConfig> {
        if normalized.len() != self.len() {
            return Err(AdrError::Dimension {
                what: "randomization config".into(),
                expected: self.len(),
                found: normalized.len(),
            });
        }
        Ok(RandConfig::new(normalized))
    }

    /// `low + n · (high − low)` per dimension.
    pub fn denormalize(&self, cfg: &RandConfig) -> Vec<f64> {
        self.dims
            .iter()
            .zip(cfg.values())
            .map(|(d, &n)| d.low + n * (d.high - d.low))
            .collect()
    }

    /// Physical values to normalized coordinates (clamped into the box).
    pub fn normalize(&self, physical: &[f64]) -> Result<RandConfig> {
        if physical.len() != self.len() {
            return Err(AdrError::Dimension {
                what: "physical parameter vector".into(),
                expected: self.len(),
                found: physical.len(),
            });
        }
        Ok(RandConfig::new(
            self.dims
                .iter()
                .zip(physical)
                .map(|(d, &x)| {
                    let width = d.high - d.low;
                    if width == 0.0 {
                        0.0
                    } else {
                        (x - d.low) / width
                    }
                })
                .collect(),
        ))
    }

    /// Each coordinate i.i.d. `U[0, 1)`.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> RandConfig {
        RandConfig::new((0..self.len()).map(|_| rng.gen::<f64>()).collect())
    }
}

/// One point of the randomization space in normalized coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RandConfig {
    values: Vec<f64>,
}

impl RandConfig {
    /// Coordinates are clamped into `[0, 1]`; NaN maps to 0.
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values: values
                .into_iter()
                .map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
                .collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Move each coordinate by `clip(delta_i, −max_step, max_step)` and clamp
    /// the result into `[0, 1]`.
    pub fn clamp_step(&self, delta: &[f64], max_step: f64) -> Result<RandConfig> {
        if delta.len() != self.len() {
            return Err(AdrError::Dimension {
                what: "step delta".into(),
                expected: self.len(),
                found: delta.len(),
            });
        }
        Ok(RandConfig::new(
            self.values
                .iter()
                .zip(delta)
                .map(|(&x, &d)| x + d.clamp(-max_step, max_step))
                .collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn mes() -> RandSpace {
        RandSpace::new(vec![RandDim {
            name: "main_engine_strength".into(),
            low: 8.0,
            high: 20.0,
        }])
        .unwrap()
    }

    #[test]
    fn denormalize_examples() {
        let s = mes();
        assert_eq!(s.denormalize(&RandConfig::new(vec![0.0])), vec![8.0]);
        assert_eq!(s.denormalize(&RandConfig::new(vec![0.5])), vec![14.0]);
        let damping = RandSpace::new(vec![RandDim {
            name: "damping".into(),
            low: 0.3,
            high: 2.0,
        }])
        .unwrap();
        assert_eq!(damping.denormalize(&RandConfig::new(vec![1.0])), vec![2.0]);
    }

    #[test]
    fn clamp_step_examples() {
        let c = RandConfig::new(vec![0.5, 1.0]);
        assert_eq!(c.clamp_step(&[0.0, 0.0], 0.05).unwrap(), c);
        assert_eq!(
            RandConfig::new(vec![1.0, 1.0]).clamp_step(&[0.3, 0.01], 0.05).unwrap(),
            RandConfig::new(vec![1.0, 1.0])
        );
        let moved = RandConfig::new(vec![0.5]).clamp_step(&[0.2], 0.05).unwrap();
        assert!((moved.values()[0] - 0.55).abs() < 1e-15);
        assert!(c.clamp_step(&[0.1], 0.05).is_err());
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(RandSpace::new(vec![]).is_err());
        assert!(RandSpace::new(vec![RandDim { name: "x".into(), low: 2.0, high: 1.0 }]).is_err());
    }

    #[test]
    fn uniform_sampling_is_seeded() {
        let s = mes();
        let a: Vec<_> = {
            let mut r = seeded(3);
            (0..20).map(|_| s.sample_uniform(&mut r)).collect()
        };
        let b: Vec<_> = {
            let mut r = seeded(3);
            (0..20).map(|_| s.sample_uniform(&mut r)).collect()
        };
        assert_eq!(a, b);
        assert!(a.iter().all(|c| (0.0..=1.0).contains(&c.values()[0])));
    }

    proptest! {
        #[test]
        fn normalize_inverts_denormalize(low in -50.0..50.0f64, width in 1e-3..100.0f64, t in 0.0..=1.0f64) {
            let s = RandSpace::new(vec![RandDim { name: "p".into(), low, high: low + width }]).unwrap();
            let x = low + t * width;
            let back = s.denormalize(&s.normalize(&[x]).unwrap())[0];
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0));
        }

        #[test]
        fn clamp_step_stays_in_box(
            start in proptest::collection::vec(0.0..=1.0f64, 3),
            delta in proptest::collection::vec(-2.0..2.0f64, 3),
            max_step in 0.0..0.5f64,
        ) {
            let c = RandConfig::new(start.clone());
            let n = c.clamp_step(&delta, max_step).unwrap();
            for (a, b) in start.iter().zip(n.values()) {
                prop_assert!((0.0..=1.0).contains(b));
                prop_assert!((b - a).abs() <= max_step + 1e-15);
            }
        }
    }
}
