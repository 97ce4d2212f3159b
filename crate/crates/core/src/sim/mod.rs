//! Synthetic paired-press generator standing in for the physical collection rig.

mod outline;
mod press;

pub use outline::{
    builtin_objects, find_object, irregular_hexagon, ContactProfile, ObjectOutline, Shape,
    RIGID_STIFFNESS, SOFT_STIFFNESS,
};
pub use press::{
    simulate_press, solve_contact, ContactPatch, ContactSolution, PressSpec, TaxelLayout,
    MAX_FORCE_N, MIN_FORCE_N, NOISE_FRACTION,
};

use serde::{Deserialize, Serialize};

use crate::dataset::PairedSample;
use crate::rng::derive_seed;
use crate::sensor::SensorKind;
use crate::{Error, Result};

/// Approach angles (per rotation) and target forces of a collection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressGrid {
    pub angles_deg: Vec<f64>,
    pub forces_n: Vec<f64>,
}

fn linspace_step(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| start + step * i as f64).collect()
}

impl PressGrid {
    /// 91 angles over a 90° arc in 1° steps, 25 forces from 4 N to 10 N in 0.25 N steps.
    pub fn full() -> Self {
        Self {
            angles_deg: linspace_step(0.0, 90.0, 1.0),
            forces_n: linspace_step(4.0, 10.0, 0.25),
        }
    }

    /// 31 angles (3° steps) and 9 forces (0.75 N steps).
    pub fn fast() -> Self {
        Self {
            angles_deg: linspace_step(0.0, 90.0, 3.0),
            forces_n: linspace_step(4.0, 10.0, 0.75),
        }
    }

    pub fn presses_per_rotation(&self) -> usize {
        self.angles_deg.len() * self.forces_n.len()
    }
}

/// Angle of a press in the object frame, wrapped to `[0, 360)`.
pub fn world_angle(rotation: u32, angle_deg: f64) -> f64 {
    (90.0 * f64::from(rotation) + angle_deg).rem_euclid(360.0)
}

/// One paired sample per object × rotation × angle × force. Each press gets its
/// own noise seed derived from `seed` and its grid coordinates.
pub fn generate_paired_dataset(
    objects: &[ObjectOutline],
    grid: &PressGrid,
    seed: u64,
) -> Result<Vec<PairedSample>> {
    if grid.angles_deg.is_empty() || grid.forces_n.is_empty() {
        return Err(Error::Config(
            "press grid needs at least one angle and one force".into(),
        ));
    }
    let total: usize = objects
        .iter()
        .map(|o| o.rotations as usize * grid.presses_per_rotation())
        .sum();
    let mut samples = Vec::with_capacity(total);
    for (oi, object) in objects.iter().enumerate() {
        for rotation in 0..object.rotations {
            for (ai, &a) in grid.angles_deg.iter().enumerate() {
                let angle = world_angle(rotation, a);
                for (fi, &force) in grid.forces_n.iter().enumerate() {
                    let press = |sensor: SensorKind| {
                        let spec = PressSpec {
                            angle_deg: angle,
                            target_force_n: force,
                            sensor,
                        };
                        let coords = [
                            oi as u64,
                            u64::from(rotation),
                            ai as u64,
                            fi as u64,
                            sensor as u64,
                        ];
                        simulate_press(object, &spec, Some(derive_seed(seed, "press", &coords)))
                    };
                    samples.push(PairedSample::new(
                        press(SensorKind::USkin)?,
                        press(SensorKind::Papill)?,
                    )?);
                }
            }
        }
    }
    Ok(samples)
}
