use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::PairedSample;
use crate::rng::stream;
use crate::sim::ObjectOutline;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub train: Vec<PairedSample>,
    pub test: Vec<PairedSample>,
    /// Test angles per object (every angle for unseen objects).
    pub held_out_angles: BTreeMap<String, Vec<f64>>,
}

/// Angle in millidegrees, used as an exact grouping key.
pub fn angle_key(angle_deg: f64) -> i64 {
    (angle_deg * 1000.0).round() as i64
}

pub fn unseen_object_ids(objects: &[ObjectOutline]) -> BTreeSet<String> {
    objects
        .iter()
        .filter(|o| !o.seen)
        .map(|o| o.id.clone())
        .collect()
}

/// Per object, holds out `floor(fraction × #angles)` approach angles drawn
/// without replacement; every sample at a held-out angle goes to test.
/// Objects listed in `unseen` go to test entirely.
pub fn stratified_split(
    samples: &[PairedSample],
    fraction: f64,
    seed: u64,
    unseen: &BTreeSet<String>,
) -> Result<SplitResult> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction {fraction} outside (0, 1)"
        )));
    }

    let mut angles: BTreeMap<&str, BTreeSet<i64>> = BTreeMap::new();
    for s in samples {
        angles
            .entry(s.meta().object_id.as_str())
            .or_default()
            .insert(angle_key(s.meta().angle_deg));
    }

    let mut held: BTreeMap<String, BTreeSet<i64>> = BTreeMap::new();
    for (&object, keys) in &angles {
        if keys.is_empty() {
            return Err(Error::Data(format!(
                "object '{object}' has no approach angles"
            )));
        }
        let chosen: BTreeSet<i64> = if unseen.contains(object) {
            keys.clone()
        } else {
            let keys: Vec<i64> = keys.iter().copied().collect();
            let count = (fraction * keys.len() as f64 + 1e-9).floor() as usize;
            let mut rng = stream(seed, &format!("split/{object}"), &[]);
            index::sample(&mut rng, keys.len(), count)
                .into_iter()
                .map(|i| keys[i])
                .collect()
        };
        held.insert(object.to_string(), chosen);
    }

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for s in samples {
        let m = s.meta();
        if held[&m.object_id].contains(&angle_key(m.angle_deg)) {
            test.push(s.clone());
        } else {
            train.push(s.clone());
        }
    }
    let held_out_angles = held
        .into_iter()
        .map(|(k, v)| (k, v.into_iter().map(|a| a as f64 / 1000.0).collect()))
        .collect();
    Ok(SplitResult {
        train,
        test,
        held_out_angles,
    })
}
