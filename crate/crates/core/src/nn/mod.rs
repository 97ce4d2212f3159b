//! Minimal dense-network engine.
//!
//! Everything is `f64` and single-threaded: forward passes record a [`Tape`],
//! [`Mlp::backward`] consumes it, and [`adam_step`] applies one optimizer update.
//! Randomness (init and dropout) comes only from the caller's generator.

mod adam;
mod dropout;
mod layer;
mod loss;
mod mlp;

pub use adam::{adam_step, adam_update, AdamConfig, AdamState};
pub use dropout::{dropout_forward, DropoutMask, Mode};
pub use layer::{activation_backward, activation_forward, dense_forward, Activation, DenseLayer};
pub use loss::{l1_loss, l1_loss_grad, mae_loss, mae_loss_grad};
pub use mlp::{Gradients, LayerGradients, Mlp, Tape};
