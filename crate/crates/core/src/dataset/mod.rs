//! Paired samples, leakage-safe splitting and `.utd` persistence.

mod io;
mod split;

pub use io::{load_dataset, save_dataset, DatasetFile, DatasetHeader, FORMAT_VERSION, MAGIC};
pub use split::{angle_key, stratified_split, unseen_object_ids, SplitResult};

use serde::{Deserialize, Serialize};

use crate::sensor::{FrameMeta, SensorKind, TactileFrame};
use crate::{Error, Result};

/// Frames of the same press recorded by both sensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub uskin: TactileFrame,
    pub papill: TactileFrame,
}

impl PairedSample {
    pub fn new(uskin: TactileFrame, papill: TactileFrame) -> Result<Self> {
        if uskin.sensor() != SensorKind::USkin || papill.sensor() != SensorKind::Papill {
            return Err(Error::Data(format!(
                "pair expects (USKIN, PAPILL) frames, got ({}, {})",
                uskin.sensor(),
                papill.sensor()
            )));
        }
        if uskin.meta != papill.meta {
            return Err(Error::Data(
                "paired frames disagree on contact metadata".into(),
            ));
        }
        Ok(Self { uskin, papill })
    }

    pub fn meta(&self) -> &FrameMeta {
        &self.uskin.meta
    }

    pub fn frame(&self, sensor: SensorKind) -> &TactileFrame {
        match sensor {
            SensorKind::USkin => &self.uskin,
            SensorKind::Papill => &self.papill,
        }
    }
}
