//! Reconstruction and alignment metrics.
//!
//! Both NMAE and SSIM are computed on min-max normalised frames. SSIM uses
//! whole-grid statistics per force channel (the grids are far too small for
//! windows) and averages the three channel scores.

mod report;

pub use report::{build_eval_report, EvalReport, ReportRow};

use serde::{Deserialize, Serialize};

use crate::nn::mae_loss;
use crate::sensor::{NormStats, TactileFrame, CHANNELS};
use crate::{Error, Result};

/// Stabilising constants; defaults assume a dynamic range of 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for SsimConstants {
    fn default() -> Self {
        Self::for_range(1.0)
    }
}

impl SsimConstants {
    pub fn for_range(range: f64) -> Self {
        Self {
            c1: (0.01 * range).powi(2),
            c2: (0.03 * range).powi(2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c1 > 0.0 && self.c2 > 0.0 {
            Ok(())
        } else {
            Err(Error::Config("SSIM constants must be positive".into()))
        }
    }
}

fn check_pair(orig: &TactileFrame, recon: &TactileFrame, stats: &NormStats) -> Result<()> {
    let n = orig.sensor().flat_len();
    if recon.sensor() != orig.sensor() {
        return Err(Error::shape(
            "metric frame pair",
            n,
            recon.sensor().flat_len(),
        ));
    }
    if stats.sensor != orig.sensor() {
        return Err(Error::shape(
            "metric normalisation",
            n,
            stats.sensor.flat_len(),
        ));
    }
    Ok(())
}

/// MAE between two already-normalised vectors.
pub fn nmae_normalized(a: &[f64], b: &[f64]) -> Result<f64> {
    mae_loss(a, b)
}

pub fn nmae(orig: &TactileFrame, recon: &TactileFrame, stats: &NormStats) -> Result<f64> {
    check_pair(orig, recon, stats)?;
    nmae_normalized(
        &stats.normalize_frame(orig)?,
        &stats.normalize_frame(recon)?,
    )
}

/// Single-channel SSIM with global mean, (population) variance and covariance.
pub fn ssim_channel(x: &[f64], y: &[f64], consts: &SsimConstants) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        vx += dx * dx;
        vy += dy * dy;
        cov += dx * dy;
    }
    let (vx, vy, cov) = (vx / n, vy / n, cov / n);
    ((2.0 * mx * my + consts.c1) * (2.0 * cov + consts.c2))
        / ((mx * mx + my * my + consts.c1) * (vx + vy + consts.c2))
}

/// Mean of the per-channel SSIM over interleaved `[x, y, z]` vectors.
pub fn ssim_normalized(a: &[f64], b: &[f64], consts: &SsimConstants) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape("ssim", a.len(), b.len()));
    }
    if a.is_empty() || !a.len().is_multiple_of(CHANNELS) {
        return Err(Error::Data(format!(
            "ssim input length {} is not a multiple of 3",
            a.len()
        )));
    }
    let total: f64 = (0..CHANNELS)
        .map(|c| {
            let x: Vec<f64> = a.iter().skip(c).step_by(CHANNELS).copied().collect();
            let y: Vec<f64> = b.iter().skip(c).step_by(CHANNELS).copied().collect();
            ssim_channel(&x, &y, consts)
        })
        .sum();
    Ok(total / CHANNELS as f64)
}

pub fn ssim(
    orig: &TactileFrame,
    recon: &TactileFrame,
    stats: &NormStats,
    consts: &SsimConstants,
) -> Result<f64> {
    check_pair(orig, recon, stats)?;
    ssim_normalized(
        &stats.normalize_frame(orig)?,
        &stats.normalize_frame(recon)?,
        consts,
    )
}

pub fn latent_manhattan_pair(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Mean over matched pairs of the L1 distance between latents.
pub fn latent_manhattan(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape("latent_manhattan pairs", a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::Data("no latent pairs".into()));
    }
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        if x.len() != y.len() {
            return Err(Error::shape("latent_manhattan width", x.len(), y.len()));
        }
        sum += latent_manhattan_pair(x, y);
    }
    Ok(sum / a.len() as f64)
}
