//! A small convolutional network with explicit forward and backward passes.

mod checkpoint;
mod net;
mod real;
mod sgd;
mod spec;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use net::{Backward, Gradients, Mode, Network, Output, Tensor};
pub use real::Real;
pub use sgd::{sgd_step, SgdParams, Velocity};
pub use spec::{Geometry, LayerSpec, NetSpec, Shape};
