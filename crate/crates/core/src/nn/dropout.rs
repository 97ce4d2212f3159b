use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Survivor flags plus the inverted-dropout scale applied to survivors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropoutMask {
    pub keep: Vec<bool>,
    pub scale: f64,
}

impl DropoutMask {
    pub fn identity(len: usize) -> Self {
        Self {
            keep: vec![true; len],
            scale: 1.0,
        }
    }

    pub fn apply(&self, values: &mut [f64]) {
        for (v, &k) in values.iter_mut().zip(&self.keep) {
            *v = if k { *v * self.scale } else { 0.0 };
        }
    }
}

pub(crate) fn check_rate(rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::Config(format!("dropout rate {rate} outside [0, 1)")))
    }
}

/// Inverted dropout. Eval mode is the identity; train mode zeroes each entry
/// with probability `rate` and scales survivors by `1 / (1 - rate)`.
pub fn dropout_forward(
    input: &[f64],
    rate: f64,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Vec<f64>, DropoutMask)> {
    check_rate(rate)?;
    if mode == Mode::Eval || rate == 0.0 {
        return Ok((input.to_vec(), DropoutMask::identity(input.len())));
    }
    let mask = DropoutMask {
        keep: (0..input.len())
            .map(|_| rng.random::<f64>() >= rate)
            .collect(),
        scale: 1.0 / (1.0 - rate),
    };
    let mut out = input.to_vec();
    mask.apply(&mut out);
    Ok((out, mask))
}
