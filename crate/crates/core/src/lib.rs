//! Cross-sensor tactile representation learning for non-vision tactile sensors.
//!
//! Two sensor-specific encoders (a 4×6 Hall-effect skin and a 3×3 pillar array)
//! map flattened force readings into a shared 16-d latent space. A single decoder
//! reconstructs both sensor formats from either latent, which gives
//! self-reconstruction, cross-sensor transfer and a sensor-agnostic feature for
//! downstream contact-geometry estimation.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`]: dense layers, ReLU, inverted dropout, MAE/L1, manual backprop and Adam.
//! - [`sensor`]: sensor layouts, frames and min-max normalisation.
//! - [`sim`]: a paired-press contact simulator that stands in for physical data.
//! - [`dataset`]: paired samples, leakage-safe angle splits and the `.utd` file format.
//! - [`model`]: the multi-encoder autoencoder, sample-matched training and checkpoints.
//! - [`metrics`]: NMAE, per-channel SSIM, latent Manhattan alignment and eval reports.
//! - [`geometry`]: local contact-geometry ground truth and the latent → geometry MLP.
//! - [`plot`]: SVG quiver plots and geometry overlays.

pub mod dataset;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod plot;
pub mod rng;
pub mod sensor;
pub mod sim;

pub use error::{Error, Result};
