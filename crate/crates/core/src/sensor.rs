//! Sensor layouts, tactile frames and per-channel normalisation.
//!
//! A frame stores one 3-axis force vector per taxel, row-major over the grid.
//! Channel order is `x` (lateral shear), `y` (vertical shear), `z` (normal).
//! Flattening is row-major over taxels, channel-minor: `[t0x, t0y, t0z, t1x, ...]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const CHANNELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SensorKind {
    /// 4×6 Hall-effect skin.
    #[serde(rename = "USKIN")]
    USkin,
    /// 3×3 exposed-pillar array with a raised centre pillar.
    #[serde(rename = "PAPILL")]
    Papill,
}

impl SensorKind {
    pub const ALL: [SensorKind; 2] = [SensorKind::USkin, SensorKind::Papill];

    pub fn spec(self) -> SensorSpec {
        match self {
            SensorKind::USkin => SensorSpec::new(self, 4, 6),
            SensorKind::Papill => SensorSpec::new(self, 3, 3),
        }
    }

    pub fn other(self) -> SensorKind {
        match self {
            SensorKind::USkin => SensorKind::Papill,
            SensorKind::Papill => SensorKind::USkin,
        }
    }

    pub fn flat_len(self) -> usize {
        self.spec().flat_len
    }

    pub fn id(self) -> &'static str {
        match self {
            SensorKind::USkin => "USKIN",
            SensorKind::Papill => "PAPILL",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SensorKind::USkin => "uSkin",
            SensorKind::Papill => "PapillArray",
        }
    }
}

impl fmt::Display for SensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SensorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uskin" => Ok(SensorKind::USkin),
            "papill" | "papillarray" => Ok(SensorKind::Papill),
            _ => Err(Error::Usage(format!(
                "unknown sensor '{s}' (expected uskin or papill)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub id: SensorKind,
    pub rows: usize,
    pub cols: usize,
    pub channels: usize,
    pub flat_len: usize,
}

impl SensorSpec {
    const fn new(id: SensorKind, rows: usize, cols: usize) -> Self {
        Self {
            id,
            rows,
            cols,
            channels: CHANNELS,
            flat_len: rows * cols * CHANNELS,
        }
    }

    pub fn taxels(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Material {
    #[serde(rename = "RIGID")]
    Rigid,
    #[serde(rename = "SOFT")]
    Soft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub object_id: String,
    pub material: Material,
    pub angle_deg: f64,
    pub force_target_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TactileFrame {
    sensor: SensorKind,
    /// One `[x, y, z]` force (N) per taxel, row-major.
    forces: Vec<[f64; CHANNELS]>,
    pub meta: FrameMeta,
}

impl TactileFrame {
    pub fn new(sensor: SensorKind, forces: Vec<[f64; CHANNELS]>, meta: FrameMeta) -> Result<Self> {
        let spec = sensor.spec();
        if forces.len() != spec.taxels() {
            return Err(Error::shape(
                "TactileFrame taxels",
                spec.taxels(),
                forces.len(),
            ));
        }
        if forces.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("{sensor} frame forces")));
        }
        Ok(Self {
            sensor,
            forces,
            meta,
        })
    }

    pub fn sensor(&self) -> SensorKind {
        self.sensor
    }

    pub fn forces(&self) -> &[[f64; CHANNELS]] {
        &self.forces
    }

    pub fn taxel(&self, row: usize, col: usize) -> [f64; CHANNELS] {
        self.forces[row * self.sensor.spec().cols + col]
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.forces.iter().flatten().copied().collect()
    }

    pub fn unflatten(sensor: SensorKind, flat: &[f64], meta: FrameMeta) -> Result<Self> {
        if flat.len() != sensor.flat_len() {
            return Err(Error::shape("unflatten", sensor.flat_len(), flat.len()));
        }
        let forces = flat
            .chunks_exact(CHANNELS)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        Self::new(sensor, forces, meta)
    }

    /// Sum of the normal (z) channel.
    pub fn total_normal(&self) -> f64 {
        self.forces.iter().map(|f| f[2]).sum()
    }

    pub fn peak_normal(&self) -> f64 {
        self.forces.iter().map(|f| f[2]).fold(0.0, f64::max)
    }
}

/// Per-channel min/max of one sensor over a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub sensor: SensorKind,
    pub min: [f64; CHANNELS],
    pub max: [f64; CHANNELS],
}

impl NormStats {
    pub fn from_frames<'a>(
        sensor: SensorKind,
        frames: impl IntoIterator<Item = &'a TactileFrame>,
    ) -> Result<Self> {
        let mut min = [f64::INFINITY; CHANNELS];
        let mut max = [f64::NEG_INFINITY; CHANNELS];
        let mut seen = false;
        for frame in frames {
            if frame.sensor != sensor {
                return Err(Error::Data(format!(
                    "{} frame in {sensor} statistics",
                    frame.sensor
                )));
            }
            seen = true;
            for f in &frame.forces {
                for c in 0..CHANNELS {
                    min[c] = min[c].min(f[c]);
                    max[c] = max[c].max(f[c]);
                }
            }
        }
        if !seen {
            return Err(Error::Data(format!(
                "no {sensor} frames to compute statistics from"
            )));
        }
        Ok(Self { sensor, min, max })
    }

    fn check(&self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.sensor.flat_len() {
            return Err(Error::shape(
                "normalize",
                self.sensor.flat_len(),
                flat.len(),
            ));
        }
        Ok(())
    }

    /// Affine map with training min → 0 and max → 1; a degenerate channel maps to 0.5.
    pub fn normalize(&self, flat: &[f64]) -> Result<Vec<f64>> {
        self.check(flat)?;
        Ok(flat
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let c = i % CHANNELS;
                let range = self.max[c] - self.min[c];
                if range > 0.0 {
                    (v - self.min[c]) / range
                } else {
                    0.5
                }
            })
            .collect())
    }

    pub fn denormalize(&self, flat: &[f64]) -> Result<Vec<f64>> {
        self.check(flat)?;
        Ok(flat
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let c = i % CHANNELS;
                let range = self.max[c] - self.min[c];
                if range > 0.0 {
                    self.min[c] + v * range
                } else {
                    self.min[c]
                }
            })
            .collect())
    }

    pub fn normalize_frame(&self, frame: &TactileFrame) -> Result<Vec<f64>> {
        if frame.sensor != self.sensor {
            return Err(Error::Usage(format!(
                "{} frame normalised with {} statistics",
                frame.sensor, self.sensor
            )));
        }
        self.normalize(&frame.flatten())
    }
}
