use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{AdrError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "scheme")]
pub enum Init {
    /// Orthogonal weights scaled by a gain, zero biases. The last layer gets
    /// its own gain so policy heads can start near zero.
    Orthogonal { hidden_gain: f64, output_gain: f64 },
    /// `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` for weights and biases.
    UniformFanIn,
}

/// One affine layer. `weight` is stored `fan_in × fan_out` so a batch of row
/// vectors maps as `x · W + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub weight: Matrix,
    pub bias: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub weight: Matrix,
    pub bias: Matrix,
}

/// Parameter gradients from one backward pass, plus the gradient with respect
/// to the network input.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
    pub input: Matrix,
}

impl Gradients {
    /// Gradients in the same order as [`Mlp::params`].
    pub fn as_list(&self) -> Vec<&Matrix> {
        self.layers
            .iter()
            .flat_map(|g| [&g.weight, &g.bias])
            .collect()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.as_list()
            .into_iter()
            .flat_map(|m| m.data().iter().copied())
            .collect()
    }

    pub fn scale(&mut self, c: f64) {
        for g in &mut self.layers {
            g.weight.map_inplace(|x| x * c);
            g.bias.map_inplace(|x| x * c);
        }
    }
}

#[derive(Clone, Debug)]
struct ForwardCache {
    /// Input to each layer.
    inputs: Vec<Matrix>,
    /// Post-activation output of each layer.
    outputs: Vec<Matrix>,
}

/// Feed-forward network with explicit backpropagation.
///
/// A net keeps the activations of its most recent [`Mlp::forward`] call, so
/// only one forward/backward pair can be in flight per instance. Use
/// [`Mlp::predict`] for read-only inference that leaves the cache alone.
#[derive(Clone, Debug)]
pub struct Mlp {
    sizes: Vec<usize>,
    hidden: Activation,
    output: Activation,
    layers: Vec<Layer>,
    cache: Option<ForwardCache>,
}

impl PartialEq for Mlp {
    fn eq(&self, other: &Self) -> bool {
        self.sizes == other.sizes
            && self.hidden == other.hidden
            && self.output == other.output
            && self.layers == other.layers
    }
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        init: Init,
        rng: &mut R,
    ) -> Result<Self> {
        if sizes.len() < 2 || sizes.iter().any(|&s| s == 0) {
            return Err(AdrError::Architecture(format!(
                "layer sizes must have at least two positive entries, got {sizes:?}"
            )));
        }
        let n_layers = sizes.len() - 1;
        let layers = (0..n_layers)
            .map(|l| {
                let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
                match init {
                    Init::Orthogonal {
                        hidden_gain,
                        output_gain,
                    } => {
                        let gain = if l + 1 == n_layers {
                            output_gain
                        } else {
                            hidden_gain
                        };
                        Layer {
                            weight: orthogonal(fan_in, fan_out, gain, rng),
                            bias: Matrix::zeros(1, fan_out),
                        }
                    }
                    Init::UniformFanIn => {
                        let bound = 1.0 / (fan_in as f64).sqrt();
                        let mut draw = |n: usize| -> Vec<f64> {
                            (0..n).map(|_| rng.gen_range(-bound..bound)).collect()
                        };
                        Layer {
                            weight: Matrix::from_vec(fan_in, fan_out, draw(fan_in * fan_out))
                                .expect("sized"),
                            bias: Matrix::from_vec(1, fan_out, draw(fan_out)).expect("sized"),
                        }
                    }
                }
            })
            .collect();
        Ok(Self {
            sizes: sizes.to_vec(),
            hidden,
            output,
            layers,
            cache: None,
        })
    }

    /// Assemble a net from explicit layers, validating that dimensions chain.
    pub fn from_layers(layers: Vec<Layer>, hidden: Activation, output: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(AdrError::Architecture("no layers".into()));
        }
        let mut sizes = vec![layers[0].weight.rows()];
        for (i, layer) in layers.iter().enumerate() {
            if layer.weight.rows() != *sizes.last().unwrap() {
                return Err(AdrError::Architecture(format!(
                    "layer {i} expects {} inputs but previous layer emits {}",
                    layer.weight.rows(),
                    sizes.last().unwrap()
                )));
            }
            if layer.bias.shape() != (1, layer.weight.cols()) {
                return Err(AdrError::Architecture(format!(
                    "layer {i} bias shape {:?} does not match weight {:?}",
                    layer.bias.shape(),
                    layer.weight.shape()
                )));
            }
            sizes.push(layer.weight.cols());
        }
        Ok(Self {
            sizes,
            hidden,
            output,
            layers,
            cache: None,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    fn activation_for(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output
        } else {
            self.hidden
        }
    }

    fn check_input(&self, input: &Matrix) -> Result<()> {
        if input.cols() != self.sizes[0] {
            return Err(AdrError::Shape {
                context: "Mlp input",
                left: input.shape(),
                right: (input.rows(), self.sizes[0]),
            });
        }
        Ok(())
    }

    fn layer_forward(&self, l: usize, x: &Matrix) -> Matrix {
        let layer = &self.layers[l];
        let mut z = x.matmul(&layer.weight).expect("checked dims");
        z.add_row_inplace(&layer.bias).expect("checked dims");
        let act = self.activation_for(l);
        if act != Activation::Identity {
            z.map_inplace(|v| act.apply(v));
        }
        z
    }

    /// Inference without touching the backward cache.
    pub fn predict(&self, input: &Matrix) -> Result<Matrix> {
        self.check_input(input)?;
        let mut x = self.layer_forward(0, input);
        for l in 1..self.layers.len() {
            x = self.layer_forward(l, &x);
        }
        Ok(x)
    }

    /// Forward pass that records activations for [`Mlp::backward`].
    pub fn forward(&mut self, input: &Matrix) -> Result<Matrix> {
        self.check_input(input)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut outputs = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for l in 0..self.layers.len() {
            let y = self.layer_forward(l, &x);
            inputs.push(x);
            outputs.push(y.clone());
            x = y;
        }
        self.cache = Some(ForwardCache { inputs, outputs });
        Ok(x)
    }

    /// Backpropagate `upstream = dL/d(output)` through the cached forward pass.
    pub fn backward(&self, upstream: &Matrix) -> Result<Gradients> {
        let cache = self.cache.as_ref().ok_or(AdrError::NoForwardCache)?;
        let out = cache.outputs.last().unwrap();
        if upstream.shape() != out.shape() {
            return Err(AdrError::Shape {
                context: "Mlp::backward upstream",
                left: upstream.shape(),
                right: out.shape(),
            });
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = upstream.clone();
        for l in (0..self.layers.len()).rev() {
            let act = self.activation_for(l);
            if act != Activation::Identity {
                for (d, &y) in delta.data_mut().iter_mut().zip(cache.outputs[l].data()) {
                    *d *= act.derivative_from_output(y);
                }
            }
            let weight = cache.inputs[l].t_matmul(&delta)?;
            let bias = delta.sum_rows();
            let next = delta.matmul_t(&self.layers[l].weight)?;
            grads.push(LayerGrad { weight, bias });
            delta = next;
        }
        grads.reverse();
        Ok(Gradients {
            layers: grads,
            input: delta,
        })
    }

    /// Parameters in layer order: `[W0, b0, W1, b1, ...]`.
    pub fn params(&self) -> Vec<&Matrix> {
        self.layers
            .iter()
            .flat_map(|l| [&l.weight, &l.bias])
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Matrix> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.params().iter().map(|m| m.data().len()).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for p in self.params() {
            out.extend_from_slice(p.data());
        }
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        let n = self.num_params();
        if flat.len() != n {
            return Err(AdrError::Dimension {
                what: "flat parameter vector".into(),
                expected: n,
                found: flat.len(),
            });
        }
        let mut offset = 0;
        for p in self.params_mut() {
            let len = p.data().len();
            p.data_mut().copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        Ok(())
    }

    pub fn same_architecture(&self, other: &Mlp) -> bool {
        self.sizes == other.sizes && self.hidden == other.hidden && self.output == other.output
    }

    /// Polyak averaging: `self ← (1 − tau)·self + tau·source`.
    pub fn soft_update_from(&mut self, source: &Mlp, tau: f64) -> Result<()> {
        if !self.same_architecture(source) {
            return Err(AdrError::Architecture(format!(
                "soft update between {:?} and {:?}",
                self.sizes, source.sizes
            )));
        }
        for (t, s) in self.params_mut().into_iter().zip(source.params()) {
            for (a, b) in t.data_mut().iter_mut().zip(s.data()) {
                *a = (1.0 - tau) * *a + tau * b;
            }
        }
        Ok(())
    }
}

/// Free-function form of [`Mlp::soft_update_from`].
pub fn soft_update(target: &mut Mlp, source: &Mlp, tau: f64) -> Result<()> {
    target.soft_update_from(source, tau)
}

/// Orthogonal `fan_in × fan_out` matrix from modified Gram-Schmidt on a
/// Gaussian draw. Wide layers get orthonormal rows (`W·Wᵀ = gain²·I`), tall
/// layers orthonormal columns (`Wᵀ·W = gain²·I`).
fn orthogonal<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, gain: f64, rng: &mut R) -> Matrix {
    let (tall, short) = if fan_in >= fan_out {
        (fan_in, fan_out)
    } else {
        (fan_out, fan_in)
    };
    // Columns of a `tall × short` Gaussian matrix, orthonormalised.
    let mut cols: Vec<Vec<f64>> = (0..short)
        .map(|_| (0..tall).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    for j in 0..short {
        // Two passes keep the result orthogonal to ~1e-15.
        for _ in 0..2 {
            for i in 0..j {
                let dot: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                let (head, tail) = cols.split_at_mut(j);
                for (x, q) in tail[0].iter_mut().zip(&head[i]) {
                    *x -= dot * q;
                }
            }
        }
        let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut cols[j] {
            *x /= norm;
        }
    }
    let mut w = Matrix::zeros(fan_in, fan_out);
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            if fan_in >= fan_out {
                w.set(i, j, gain * v);
            } else {
                w.set(j, i, gain * v);
            }
        }
    }
    w
}
