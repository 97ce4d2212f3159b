//! The multi-encoder / shared-decoder autoencoder.
//!
//! Each sensor has its own encoder (`flat → 64 → 48 → 16`); one decoder
//! (`16 → 64 → 96 → 99`) reconstructs both sensors from either latent. The
//! decoder output is laid out as `[uSkin 72 | PapillArray 27]`. All network
//! inputs and outputs live in min-max normalised space.

mod checkpoint;
mod train;

pub use checkpoint::{
    Architecture, Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION, DECODER_ORDER,
};
pub use train::{
    evaluate_split, loss_and_gradients, train, training_step, EpochRecord, ModelGradients,
    OptimizerStates, StepLoss, TrainConfig, TrainHistory, Trainer,
};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::PairedSample;
use crate::metrics::{latent_manhattan_pair, nmae_normalized};
use crate::nn::Mlp;
use crate::rng::stream;
use crate::sensor::{NormStats, SensorKind, TactileFrame};
use crate::{Error, Result};

pub const LATENT_DIM: usize = 16;
pub const ENCODER_HIDDEN: [usize; 2] = [64, 48];
pub const DECODER_HIDDEN: [usize; 2] = [64, 96];
pub const DECODER_OUTPUT: usize = 99;

/// A reconstruction direction: encode with `from`, decode into `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Direction {
    pub from: SensorKind,
    pub to: SensorKind,
}

impl Direction {
    /// Table order: uSkin→uSkin, uSkin→Papill, Papill→Papill, Papill→uSkin.
    pub const ALL: [Direction; 4] = [
        Direction {
            from: SensorKind::USkin,
            to: SensorKind::USkin,
        },
        Direction {
            from: SensorKind::USkin,
            to: SensorKind::Papill,
        },
        Direction {
            from: SensorKind::Papill,
            to: SensorKind::Papill,
        },
        Direction {
            from: SensorKind::Papill,
            to: SensorKind::USkin,
        },
    ];

    pub fn is_self(self) -> bool {
        self.from == self.to
    }

    pub fn index(self) -> usize {
        Self::ALL
            .iter()
            .position(|&d| d == self)
            .expect("all directions listed")
    }

    /// Snake-case column name, e.g. `uskin_to_papill`.
    pub fn slug(self) -> String {
        format!(
            "{}_to_{}",
            self.from.id().to_lowercase(),
            self.to.id().to_lowercase()
        )
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} → {}", self.from.label(), self.to.label())
    }
}

/// One value per [`Direction`], in [`Direction::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerDirection(pub [f64; 4]);

impl PerDirection {
    pub fn get(&self, d: Direction) -> f64 {
        self.0[d.index()]
    }
}

/// Latents and normalised-space reconstructions for one pair (eval mode).
#[derive(Debug, Clone)]
pub struct PairPass {
    pub latent_uskin: Vec<f64>,
    pub latent_papill: Vec<f64>,
    pub inputs: [Vec<f64>; 2],
    /// `recon[d.index()]` is the reconstruction for direction `d`.
    pub recon: [Vec<f64>; 4],
}

impl PairPass {
    pub fn target(&self, sensor: SensorKind) -> &[f64] {
        &self.inputs[sensor as usize]
    }

    pub fn nmae(&self, d: Direction) -> f64 {
        nmae_normalized(&self.recon[d.index()], self.target(d.to))
            .expect("shapes fixed by the model")
    }

    pub fn latent_distance(&self) -> f64 {
        latent_manhattan_pair(&self.latent_uskin, &self.latent_papill)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniTacModel {
    pub encoder_uskin: Mlp,
    pub encoder_papill: Mlp,
    pub decoder: Mlp,
    pub norm_uskin: NormStats,
    pub norm_papill: NormStats,
}

impl UniTacModel {
    /// Fresh model with He-initialised weights and normalisation fitted on `train`.
    pub fn init(train: &[PairedSample], dropout: f64, seed: u64) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Data("training set is empty".into()));
        }
        let norm_uskin = NormStats::from_frames(SensorKind::USkin, train.iter().map(|s| &s.uskin))?;
        let norm_papill =
            NormStats::from_frames(SensorKind::Papill, train.iter().map(|s| &s.papill))?;
        Self::with_norms(norm_uskin, norm_papill, dropout, seed)
    }

    pub fn with_norms(
        norm_uskin: NormStats,
        norm_papill: NormStats,
        dropout: f64,
        seed: u64,
    ) -> Result<Self> {
        let encoder = |sensor: SensorKind, tag: u64| {
            let widths = [
                sensor.flat_len(),
                ENCODER_HIDDEN[0],
                ENCODER_HIDDEN[1],
                LATENT_DIM,
            ];
            Mlp::new(&widths, dropout, &mut stream(seed, "init", &[tag]))
        };
        let decoder_widths = [
            LATENT_DIM,
            DECODER_HIDDEN[0],
            DECODER_HIDDEN[1],
            DECODER_OUTPUT,
        ];
        Ok(Self {
            encoder_uskin: encoder(SensorKind::USkin, 0)?,
            encoder_papill: encoder(SensorKind::Papill, 1)?,
            decoder: Mlp::new(&decoder_widths, dropout, &mut stream(seed, "init", &[2]))?,
            norm_uskin,
            norm_papill,
        })
    }

    pub fn encoder(&self, sensor: SensorKind) -> &Mlp {
        match sensor {
            SensorKind::USkin => &self.encoder_uskin,
            SensorKind::Papill => &self.encoder_papill,
        }
    }

    pub fn norm(&self, sensor: SensorKind) -> &NormStats {
        match sensor {
            SensorKind::USkin => &self.norm_uskin,
            SensorKind::Papill => &self.norm_papill,
        }
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            encoder_uskin: self.encoder_uskin.widths(),
            encoder_papill: self.encoder_papill.widths(),
            decoder: self.decoder.widths(),
        }
    }

    /// Latent of a frame through its sensor's encoder (dropout off).
    pub fn encode(&self, sensor: SensorKind, frame: &TactileFrame) -> Result<Vec<f64>> {
        if frame.sensor() != sensor {
            return Err(Error::Usage(format!(
                "{} frame passed to the {sensor} encoder",
                frame.sensor()
            )));
        }
        self.encoder(sensor)
            .forward(&self.norm(sensor).normalize_frame(frame)?)
    }

    /// Raw 99-d decoder output for a latent.
    pub fn decode_raw(&self, latent: &[f64]) -> Result<Vec<f64>> {
        if latent.len() != LATENT_DIM {
            return Err(Error::shape("decode latent", LATENT_DIM, latent.len()));
        }
        self.decoder.forward(latent)
    }

    /// Normalised reconstructions `(uSkin 72, PapillArray 27)`.
    pub fn decode(&self, latent: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut out = self.decode_raw(latent)?;
        let papill = out.split_off(SensorKind::USkin.flat_len());
        Ok((out, papill))
    }

    /// Encode with the frame's own encoder, decode into `target` format, and
    /// denormalise to Newtons. Metadata is copied from the source frame.
    pub fn transfer(&self, frame: &TactileFrame, target: SensorKind) -> Result<TactileFrame> {
        let latent = self.encode(frame.sensor(), frame)?;
        let (u, p) = self.decode(&latent)?;
        let part = match target {
            SensorKind::USkin => u,
            SensorKind::Papill => p,
        };
        let newtons = self.norm(target).denormalize(&part)?;
        TactileFrame::unflatten(target, &newtons, frame.meta.clone())
    }

    /// Eval-mode pass over one pair: both latents and all four reconstructions.
    pub fn pass(&self, sample: &PairedSample) -> Result<PairPass> {
        let xu = self.norm_uskin.normalize_frame(&sample.uskin)?;
        let xp = self.norm_papill.normalize_frame(&sample.papill)?;
        let zu = self.encoder_uskin.forward(&xu)?;
        let zp = self.encoder_papill.forward(&xp)?;
        let (uu, up) = self.decode(&zu)?;
        let (pu, pp) = self.decode(&zp)?;
        Ok(PairPass {
            latent_uskin: zu,
            latent_papill: zp,
            inputs: [xu, xp],
            recon: [uu, up, pp, pu],
        })
    }
}
