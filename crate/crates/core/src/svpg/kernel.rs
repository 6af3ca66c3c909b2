//! Kernels for the Stein update. Points are flattened particle parameters.

/// Everything the particle update needs from a kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTerms {
    /// `gram[j][i] = k(x_j, x_i)`.
    pub gram: Vec<Vec<f64>>,
    /// `repulsion[i] = Σ_j ∇_{x_j} k(x_j, x_i)`.
    pub repulsion: Vec<Vec<f64>>,
}

pub trait SteinKernel: Send + Sync + std::fmt::Debug {
    fn evaluate(&self, points: &[Vec<f64>]) -> KernelTerms;
}

/// `k(x, y) = exp(−‖x − y‖² / h)` with `h = median pairwise squared
/// distance / log(N + 1)`. Falls back to `h = 1` when there are no pairs or
/// every pair coincides.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RbfMedian;

pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Median of the upper-triangle pairwise squared distances (mean of the two
/// middle values for an even count).
pub fn median_pairwise_sq(points: &[Vec<f64>]) -> Option<f64> {
    let mut d = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d.push(squared_distance(&points[i], &points[j]));
        }
    }
    if d.is_empty() {
        return None;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len() / 2;
    Some(if d.len() % 2 == 1 {
        d[m]
    } else {
        0.5 * (d[m - 1] + d[m])
    })
}

impl RbfMedian {
    pub fn bandwidth(points: &[Vec<f64>]) -> f64 {
        match median_pairwise_sq(points) {
            Some(med) if med > 0.0 => med / ((points.len() as f64) + 1.0).ln(),
            _ => 1.0,
        }
    }

    pub fn value(x: &[f64], y: &[f64], h: f64) -> f64 {
        (-squared_distance(x, y) / h).exp()
    }

    /// `∇_x k(x, y) = −(2/h)(x − y)·k(x, y)`.
    pub fn grad_x(x: &[f64], y: &[f64], h: f64) -> Vec<f64> {
        let k = Self::value(x, y, h);
        x.iter().zip(y).map(|(a, b)| -2.0 / h * (a - b) * k).collect()
    }
}

impl SteinKernel for RbfMedian {
    fn evaluate(&self, points: &[Vec<f64>]) -> KernelTerms {
        let n = points.len();
        let h = Self::bandwidth(points);
        let mut gram = vec![vec![0.0; n]; n];
        for i in 0..n {
            gram[i][i] = 1.0;
            for j in i + 1..n {
                let k = Self::value(&points[i], &points[j], h);
                gram[i][j] = k;
                gram[j][i] = k;
            }
        }
        let dim = points.first().map_or(0, Vec::len);
        let repulsion = (0..n)
            .map(|i| {
                let mut r = vec![0.0; dim];
                for j in 0..n {
                    let c = 2.0 / h * gram[j][i];
                    for (r, (xi, xj)) in r.iter_mut().zip(points[i].iter().zip(&points[j])) {
                        *r += c * (xi - xj);
                    }
                }
                r
            })
            .collect();
        KernelTerms { gram, repulsion }
    }
}

/// `k ≡ 1`, `∇k ≡ 0`. Turns the Stein update into a plain average of the
/// particles' policy gradients.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConstantKernel;

impl SteinKernel for ConstantKernel {
    fn evaluate(&self, points: &[Vec<f64>]) -> KernelTerms {
        let n = points.len();
        let dim = points.first().map_or(0, Vec::len);
        KernelTerms {
            gram: vec![vec![1.0; n]; n],
            repulsion: vec![vec![0.0; dim]; n],
        }
    }
}
