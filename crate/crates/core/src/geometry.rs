//! Local contact-geometry estimation from shared latents.
//!
//! Ground truth is the outline's depth profile at 11 lateral positions
//! (−7 mm … +7 mm in 1.4 mm steps) in the press-aligned frame, relative to
//! the contact origin. Positive offsets mean the surface recedes from the
//! sensor. A per-sensor MLP maps 16-d latents to that profile.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{stratified_split, PairedSample};
use crate::model::{UniTacModel, LATENT_DIM};
use crate::nn::{adam_step, l1_loss, l1_loss_grad, AdamConfig, AdamState, Gradients, Mlp};
use crate::rng::stream;
use crate::sensor::SensorKind;
use crate::sim::{find_object, ObjectOutline};
use crate::{Error, Result};

pub const PROFILE_POINTS: usize = 11;
pub const PROFILE_SPAN_MM: f64 = 14.0;
pub const PROFILE_STEP_MM: f64 = PROFILE_SPAN_MM / (PROFILE_POINTS - 1) as f64;
pub const GEOM_HIDDEN: [usize; 4] = [64, 128, 64, 32];

/// Lateral sample positions in mm.
pub fn lateral_positions() -> [f64; PROFILE_POINTS] {
    std::array::from_fn(|i| (i as f64 - (PROFILE_POINTS / 2) as f64) * PROFILE_STEP_MM)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryTarget {
    pub offsets: Vec<f64>,
    /// Set when a sample point lay past the outline's lateral extent and was
    /// clamped to its edge.
    pub clamped: bool,
}

pub fn extract_ground_truth(outline: &ObjectOutline, angle_deg: f64) -> Result<GeometryTarget> {
    let profile = outline.profile(angle_deg)?;
    let (centre, centre_clamped) = profile.depth_at_clamped(0.0);
    let mut clamped = centre_clamped;
    let offsets = lateral_positions()
        .iter()
        .map(|&x| {
            let (d, c) = profile.depth_at_clamped(x);
            clamped |= c;
            d - centre
        })
        .collect();
    Ok(GeometryTarget { offsets, clamped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomSample {
    pub latent: Vec<f64>,
    pub target: Vec<f64>,
    pub object_id: String,
    pub angle_deg: f64,
    pub force_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomSet {
    pub train: Vec<GeomSample>,
    pub test: Vec<GeomSample>,
}

/// Latent/geometry pairs for both sensors over the same angle-stratified split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomSplit {
    pub uskin: GeomSet,
    pub papill: GeomSet,
    pub held_out_angles: Vec<f64>,
}

impl GeomSplit {
    pub fn get(&self, sensor: SensorKind) -> &GeomSet {
        match sensor {
            SensorKind::USkin => &self.uskin,
            SensorKind::Papill => &self.papill,
        }
    }
}

/// Encodes unseen-object samples with each sensor's encoder and pairs them
/// with the ground-truth profile at their approach angle.
pub fn build_geom_dataset(
    model: &UniTacModel,
    samples: &[PairedSample],
    objects: &[ObjectOutline],
    fraction: f64,
    seed: u64,
) -> Result<GeomSplit> {
    if samples.is_empty() {
        return Err(Error::Data(
            "no unseen-object samples for the geometry task".into(),
        ));
    }
    for s in samples {
        if find_object(objects, &s.meta().object_id)?.seen {
            return Err(Error::Data(format!(
                "geometry estimation runs on unseen objects only, got '{}'",
                s.meta().object_id
            )));
        }
    }
    let split = stratified_split(samples, fraction, seed, &BTreeSet::new())?;

    let convert = |set: &[PairedSample], sensor: SensorKind| -> Result<Vec<GeomSample>> {
        set.iter()
            .map(|s| {
                let m = s.meta();
                let outline = find_object(objects, &m.object_id)?;
                Ok(GeomSample {
                    latent: model.encode(sensor, s.frame(sensor))?,
                    target: extract_ground_truth(outline, m.angle_deg)?.offsets,
                    object_id: m.object_id.clone(),
                    angle_deg: m.angle_deg,
                    force_n: m.force_target_n,
                })
            })
            .collect()
    };
    let set = |sensor| -> Result<GeomSet> {
        Ok(GeomSet {
            train: convert(&split.train, sensor)?,
            test: convert(&split.test, sensor)?,
        })
    };
    Ok(GeomSplit {
        uskin: set(SensorKind::USkin)?,
        papill: set(SensorKind::Papill)?,
        held_out_angles: split.held_out_angles.into_values().flatten().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomTrainConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    pub seed: u64,
    #[serde(default)]
    pub adam: AdamConfig,
}

impl GeomTrainConfig {
    /// Defaults for a given source sensor: dropout 0.2 for uSkin, 0.3 for PapillArray.
    pub fn for_sensor(sensor: SensorKind, seed: u64) -> Self {
        Self {
            hidden: GEOM_HIDDEN.to_vec(),
            epochs: 80,
            batch_size: 64,
            lr: 5e-5,
            weight_decay: 1e-3,
            dropout: match sensor {
                SensorKind::USkin => 0.2,
                SensorKind::Papill => 0.3,
            },
            seed,
            adam: AdamConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.hidden.contains(&0) {
            return Err(Error::Config(
                "geometry MLP sizes and schedule must be positive".into(),
            ));
        }
        if !(self.lr >= 0.0 && self.weight_decay >= 0.0) {
            return Err(Error::Config(
                "learning rate and weight decay must be ≥ 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomModel {
    pub sensor: SensorKind,
    pub config: GeomTrainConfig,
    pub mlp: Mlp,
}

impl GeomModel {
    pub fn init(sensor: SensorKind, config: GeomTrainConfig) -> Result<Self> {
        config.validate()?;
        let widths: Vec<usize> = std::iter::once(LATENT_DIM)
            .chain(config.hidden.iter().copied())
            .chain(std::iter::once(PROFILE_POINTS))
            .collect();
        let mlp = Mlp::new(
            &widths,
            config.dropout,
            &mut stream(config.seed, "geom-init", &[]),
        )?;
        Ok(Self {
            sensor,
            config,
            mlp,
        })
    }

    pub fn predict(&self, latent: &[f64]) -> Result<Vec<f64>> {
        self.mlp.forward(latent)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let file = GeomFile {
            format: GEOM_FORMAT.into(),
            version: GEOM_VERSION,
            model: self.clone(),
        };
        fs::write(path, serde_json::to_vec(&file)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file: GeomFile = serde_json::from_slice(&fs::read(path)?)?;
        if file.format != GEOM_FORMAT || file.version != GEOM_VERSION {
            return Err(Error::Format(format!(
                "expected {GEOM_FORMAT} v{GEOM_VERSION}, found {} v{}",
                file.format, file.version
            )));
        }
        let m = file.model;
        if m.mlp.input_dim() != LATENT_DIM || m.mlp.output_dim() != PROFILE_POINTS {
            return Err(Error::Format(format!(
                "geometry MLP maps {} → {}, expected {LATENT_DIM} → {PROFILE_POINTS}",
                m.mlp.input_dim(),
                m.mlp.output_dim()
            )));
        }
        Ok(m)
    }
}

const GEOM_FORMAT: &str = "unitac-geometry";
const GEOM_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct GeomFile {
    format: String,
    version: u32,
    model: GeomModel,
}

/// Trains a latent → profile MLP with L1 loss (mm) and Adam with weight decay.
pub fn train_geom(
    sensor: SensorKind,
    train: &[GeomSample],
    config: &GeomTrainConfig,
) -> Result<GeomModel> {
    if train.is_empty() {
        return Err(Error::Data("geometry training set is empty".into()));
    }
    let mut model = GeomModel::init(sensor, config.clone())?;
    let mut adam = AdamState::new(&model.mlp);
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=config.epochs as u64 {
        order.sort_unstable();
        order.shuffle(&mut stream(config.seed, "geom-shuffle", &[epoch]));
        let mut rng = stream(config.seed, "geom-dropout", &[epoch]);
        for chunk in order.chunks(config.batch_size) {
            let mut grads = Gradients::zeros_like(&model.mlp);
            let scale = 1.0 / chunk.len() as f64;
            for &i in chunk {
                let s = &train[i];
                let (pred, tape) = model.mlp.forward_train(&s.latent, &mut rng)?;
                let mut g = l1_loss_grad(&pred, &s.target)?;
                g.iter_mut().for_each(|v| *v *= scale);
                model.mlp.backward_into(tape, &g, &mut grads)?;
            }
            adam_step(
                &mut model.mlp,
                &grads,
                &mut adam,
                &config.adam,
                config.lr,
                config.weight_decay,
            )?;
        }
    }
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomEval {
    pub mean_error_mm: f64,
    pub per_sample_mm: Vec<f64>,
    pub predictions: Vec<Vec<f64>>,
}

pub fn eval_geom(model: &GeomModel, test: &[GeomSample]) -> Result<GeomEval> {
    if test.is_empty() {
        return Err(Error::Data("geometry test set is empty".into()));
    }
    let predictions = test
        .iter()
        .map(|s| model.predict(&s.latent))
        .collect::<Result<Vec<_>>>()?;
    let per_sample_mm = predictions
        .iter()
        .zip(test)
        .map(|(p, s)| l1_loss(p, &s.target))
        .collect::<Result<Vec<_>>>()?;
    let mean_error_mm = per_sample_mm.iter().sum::<f64>() / per_sample_mm.len() as f64;
    Ok(GeomEval {
        mean_error_mm,
        per_sample_mm,
        predictions,
    })
}

/// Mean error for every (train sensor, test sensor) combination, indexed
/// `[train][test]` in [`SensorKind::ALL`] order.
pub fn eval_geom_grid(models: &[GeomModel; 2], split: &GeomSplit) -> Result<[[f64; 2]; 2]> {
    let mut grid = [[0.0; 2]; 2];
    for (i, model) in models.iter().enumerate() {
        for (j, &test_sensor) in SensorKind::ALL.iter().enumerate() {
            grid[i][j] = eval_geom(model, &split.get(test_sensor).test)?.mean_error_mm;
        }
    }
    Ok(grid)
}

/// Places each predicted profile back on the object: the 11 points are
/// rotated from the press frame at `angle` into object coordinates.
pub fn map_back(
    outline: &ObjectOutline,
    predictions: &[Vec<f64>],
    angles_deg: &[f64],
) -> Result<Vec<[f64; 2]>> {
    if predictions.len() != angles_deg.len() {
        return Err(Error::shape(
            "map_back angles",
            predictions.len(),
            angles_deg.len(),
        ));
    }
    let xs = lateral_positions();
    let mut points = Vec::with_capacity(predictions.len() * PROFILE_POINTS);
    for (pred, &angle) in predictions.iter().zip(angles_deg) {
        if pred.len() != PROFILE_POINTS {
            return Err(Error::shape("map_back profile", PROFILE_POINTS, pred.len()));
        }
        let profile = outline.profile(angle)?;
        points.extend(xs.iter().zip(pred).map(|(&x, &d)| profile.to_world(x, d)));
    }
    Ok(points)
}

pub struct Overlay<'a> {
    pub outline: &'a ObjectOutline,
    pub predicted: Vec<[f64; 2]>,
    pub truth: Vec<[f64; 2]>,
}

/// Predicted and true contact points for the test samples of the first
/// sample's object, ready for an overlay plot.
pub fn overlay_points<'a>(
    model: &GeomModel,
    test: &[GeomSample],
    objects: &'a [ObjectOutline],
) -> Result<Overlay<'a>> {
    let first = test
        .first()
        .ok_or_else(|| Error::Data("geometry test set is empty".into()))?;
    let outline = find_object(objects, &first.object_id)?;
    let picked: Vec<&GeomSample> = test
        .iter()
        .filter(|s| s.object_id == first.object_id)
        .collect();
    let angles: Vec<f64> = picked.iter().map(|s| s.angle_deg).collect();
    let predictions = picked
        .iter()
        .map(|s| model.predict(&s.latent))
        .collect::<Result<Vec<_>>>()?;
    let targets: Vec<Vec<f64>> = picked.iter().map(|s| s.target.clone()).collect();
    Ok(Overlay {
        outline,
        predicted: map_back(outline, &predictions, &angles)?,
        truth: map_back(outline, &targets, &angles)?,
    })
}

pub fn points_csv(points: &[[f64; 2]]) -> String {
    let mut out = String::from("x_mm,y_mm\n");
    for p in points {
        out.push_str(&format!("{},{}\n", p[0], p[1]));
    }
    out
}
