//! Small dense neural-network engine: matrices, MLPs with hand-written
//! backpropagation, Adam, Polyak averaging and JSON checkpoints.

mod adam;
mod checkpoint;
mod matrix;
mod mlp;

pub use adam::AdamState;
pub use checkpoint::{load_net, save_net, NetCheckpoint};
pub use matrix::Matrix;
pub use mlp::{sigmoid, soft_update, Activation, Gradients, Init, Layer, LayerGrad, Mlp};
