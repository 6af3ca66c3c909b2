//! JSON checkpoint for a single network: layer sizes, activations, flattened
//! weights and biases, and optionally the Adam state that trains it.
//!
//! ```json
//! {
//!   "layer_sizes": [2, 64, 1],
//!   "hidden_activation": "tanh",
//!   "output_activation": "identity",
//!   "weights": [[...], [...]],
//!   "biases": [[...], [...]],
//!   "adam": { "lr": 0.001, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8,
//!             "step": 12, "m": [...], "v": [...] }
//! }
//! ```
//!
//! Weights are row-major `fan_in × fan_out`. Floats are written in shortest
//! round-trip form, so `read(write(net)) == net` bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::matrix::Matrix;
use super::mlp::{Activation, Layer, Mlp};
use crate::error::{AdrError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetCheckpoint {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adam: Option<AdamState>,
}

impl NetCheckpoint {
    pub fn capture(net: &Mlp, adam: Option<&AdamState>) -> Self {
        Self {
            layer_sizes: net.sizes().to_vec(),
            hidden_activation: net.hidden_activation(),
            output_activation: net.output_activation(),
            weights: net.layers().iter().map(|l| l.weight.data().to_vec()).collect(),
            biases: net.layers().iter().map(|l| l.bias.data().to_vec()).collect(),
            adam: adam.cloned(),
        }
    }

    /// Rebuild the network, naming the offending field on any inconsistency.
    pub fn restore(self, origin: &Path) -> Result<(Mlp, Option<AdamState>)> {
        let bad = |field: String, reason: String| AdrError::Checkpoint {
            path: origin.to_path_buf(),
            field,
            reason,
        };
        let sizes = &self.layer_sizes;
        if sizes.len() < 2 {
            return Err(bad("layer_sizes".into(), "need at least two entries".into()));
        }
        let n = sizes.len() - 1;
        if self.weights.len() != n {
            return Err(bad(
                "weights".into(),
                format!("expected {n} layers, found {}", self.weights.len()),
            ));
        }
        if self.biases.len() != n {
            return Err(bad(
                "biases".into(),
                format!("expected {n} layers, found {}", self.biases.len()),
            ));
        }
        let mut layers = Vec::with_capacity(n);
        for (l, (w, b)) in self.weights.into_iter().zip(self.biases).enumerate() {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let weight = Matrix::from_vec(fan_in, fan_out, w).map_err(|_| {
                bad(
                    format!("weights[{l}]"),
                    format!("expected {} values", fan_in * fan_out),
                )
            })?;
            let bias = Matrix::from_vec(1, fan_out, b)
                .map_err(|_| bad(format!("biases[{l}]"), format!("expected {fan_out} values")))?;
            if !weight.is_finite() || !bias.is_finite() {
                return Err(bad(format!("layer {l}"), "non-finite parameter".into()));
            }
            layers.push(Layer { weight, bias });
        }
        let net = Mlp::from_layers(layers, self.hidden_activation, self.output_activation)?;
        if let Some(adam) = &self.adam {
            let params = net.params();
            let consistent = adam.m.len() == adam.v.len()
                && (adam.m.is_empty()
                    || (adam.m.len() == params.len()
                        && adam
                            .m
                            .iter()
                            .zip(&adam.v)
                            .zip(&params)
                            .all(|((m, v), p)| m.shape() == p.shape() && v.shape() == p.shape())));
            if !consistent {
                return Err(bad("adam".into(), "moment shapes do not match layers".into()));
            }
        }
        Ok((net, self.adam))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| AdrError::Checkpoint {
            path: origin.to_path_buf(),
            field: field_hint(&e),
            reason: e.to_string(),
        })
    }
}

fn field_hint(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    // serde reports "missing field `x`" / "unknown variant ..." etc.
    msg.split('`').nth(1).unwrap_or("<document>").to_string()
}

pub fn save_net(path: impl AsRef<Path>, net: &Mlp, adam: Option<&AdamState>) -> Result<()> {
    let path = path.as_ref();
    let json = NetCheckpoint::capture(net, adam).to_json()?;
    fs::write(path, json).map_err(|e| AdrError::io(path, e))
}

pub fn load_net(path: impl AsRef<Path>) -> Result<(Mlp, Option<AdamState>)> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let text = fs::read_to_string(&path).map_err(|e| AdrError::io(&path, e))?;
    NetCheckpoint::from_json(&text, &path)?.restore(&path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::mlp::Init;
    use crate::rng::seeded;

    #[test]
    fn round_trip_is_bit_exact_including_adam() {
        let mut rng = seeded(4);
        let mut net = Mlp::new(
            &[3, 7, 2],
            Activation::Tanh,
            Activation::Sigmoid,
            Init::Orthogonal {
                hidden_gain: 1.0,
                output_gain: 0.01,
            },
            &mut rng,
        )
        .unwrap();
        let mut adam = AdamState::new(3e-4);
        let x = Matrix::from_rows(&[[0.1, 0.2, 0.3]]).unwrap();
        net.forward(&x).unwrap();
        let g = net.backward(&Matrix::row(&[0.3, -1.0 / 3.0])).unwrap();
        adam.step(net.params_mut(), &g.as_list()).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        save_net(&path, &net, Some(&adam)).unwrap();
        let (back, back_adam) = load_net(&path).unwrap();
        assert_eq!(back, net);
        assert_eq!(back_adam.unwrap(), adam);
        let again = fs::read_to_string(&path).unwrap();
        save_net(&path, &back, Some(&adam)).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), again);
    }

    #[test]
    fn malformed_checkpoint_names_field() {
        let mut rng = seeded(1);
        let net = Mlp::new(&[2, 3, 1], Activation::Relu, Activation::Identity, Init::UniformFanIn, &mut rng)
            .unwrap();
        let mut ck = NetCheckpoint::capture(&net, None);
        ck.weights[1].pop();
        let err = ck.restore(Path::new("x.json")).unwrap_err().to_string();
        assert!(err.contains("weights[1]"), "{err}");

        let err = NetCheckpoint::from_json(r#"{"layer_sizes":[2,1]}"#, Path::new("y.json"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("hidden_activation"), "{err}");
    }
}
