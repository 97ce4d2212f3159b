//! JSON checkpoints for the autoencoder and its optimiser.
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so a save/load cycle is bit-exact and resuming from a checkpoint
//! matches uninterrupted training.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::train::{OptimizerStates, TrainConfig, Trainer};
use super::{UniTacModel, DECODER_HIDDEN, DECODER_OUTPUT, ENCODER_HIDDEN, LATENT_DIM};
use crate::sensor::SensorKind;
use crate::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "unitac-nv-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;
pub const DECODER_ORDER: [SensorKind; 2] = [SensorKind::USkin, SensorKind::Papill];

/// Layer widths (input first) of the three sub-networks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub encoder_uskin: Vec<usize>,
    pub encoder_papill: Vec<usize>,
    pub decoder: Vec<usize>,
}

impl Architecture {
    pub fn expected() -> Self {
        let enc = |s: SensorKind| {
            vec![
                s.flat_len(),
                ENCODER_HIDDEN[0],
                ENCODER_HIDDEN[1],
                LATENT_DIM,
            ]
        };
        Self {
            encoder_uskin: enc(SensorKind::USkin),
            encoder_papill: enc(SensorKind::Papill),
            decoder: vec![
                LATENT_DIM,
                DECODER_HIDDEN[0],
                DECODER_HIDDEN[1],
                DECODER_OUTPUT,
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub decoder_output_order: Vec<SensorKind>,
    pub architecture: Architecture,
    pub seed: u64,
    pub epochs_completed: usize,
    pub config: TrainConfig,
    pub model: UniTacModel,
    pub optimizer: OptimizerStates,
}

impl Checkpoint {
    pub fn from_trainer(trainer: &Trainer) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            decoder_output_order: DECODER_ORDER.to_vec(),
            architecture: trainer.model.architecture(),
            seed: trainer.config.seed,
            epochs_completed: trainer.epochs_completed,
            config: trainer.config.clone(),
            model: trainer.model.clone(),
            optimizer: trainer.optim.clone(),
        }
    }

    pub fn into_trainer(self) -> Trainer {
        Trainer {
            model: self.model,
            optim: self.optimizer,
            config: self.config,
            epochs_completed: self.epochs_completed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Error::Format(format!(
                "not a checkpoint (format '{}')",
                self.format
            )));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "checkpoint version {} (this build reads {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        if self.decoder_output_order != DECODER_ORDER {
            return Err(Error::Format(
                "decoder output order tag must be [USKIN, PAPILL]".into(),
            ));
        }
        if self.architecture != self.model.architecture() {
            return Err(Error::Format(
                "architecture header disagrees with stored weights".into(),
            ));
        }
        if self.architecture != Architecture::expected() {
            return Err(Error::Format("unexpected network architecture".into()));
        }
        if self.seed != self.config.seed {
            return Err(Error::Format(
                "seed header disagrees with training config".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(self)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_slice(bytes)?;
        ck.validate()?;
        Ok(ck)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::tiny_data;

    fn config(epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: 5,
            seed: 21,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn save_load_is_exact() {
        let data = tiny_data();
        let mut t = Trainer::new(&data, config(1)).unwrap();
        t.run(&data, &[]).unwrap();
        let ck = Checkpoint::from_trainer(&t);
        let back = Checkpoint::from_json(&ck.to_json().unwrap()).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_json().unwrap(), ck.to_json().unwrap());
    }

    #[test]
    fn resume_matches_uninterrupted_training() {
        let data = tiny_data();
        let (train, test) = data.split_at(9);

        let mut straight = Trainer::new(train, config(4)).unwrap();
        straight.run(train, test).unwrap();

        let mut first = Trainer::new(train, config(2)).unwrap();
        first.run(train, test).unwrap();
        let bytes = Checkpoint::from_trainer(&first).to_json().unwrap();
        let mut resumed = Checkpoint::from_json(&bytes).unwrap().into_trainer();
        resumed.config.epochs = 4;
        resumed.run(train, test).unwrap();

        assert_eq!(resumed.epochs_completed, 4);
        assert_eq!(resumed.model, straight.model);
        assert_eq!(resumed.optim, straight.optim);
    }

    #[test]
    fn tampered_header_is_rejected() {
        let data = tiny_data();
        let t = Trainer::new(&data, config(1)).unwrap();
        let mut ck = Checkpoint::from_trainer(&t);
        ck.decoder_output_order.reverse();
        assert!(Checkpoint::from_json(&ck.to_json().unwrap()).is_err());
        let mut ck = Checkpoint::from_trainer(&t);
        ck.version = 7;
        assert!(Checkpoint::from_json(&ck.to_json().unwrap()).is_err());
    }
}
