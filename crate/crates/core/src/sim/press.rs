//! Penetration-based contact model for a flat sensor pressed onto a prism.
//!
//! The sensor plane advances along the press direction until the integrated
//! normal force reaches the target. Pressure is `stiffness × penetration`,
//! integrated over each taxel's lateral footprint and scaled by a per-row
//! weight (the prism is uniform along the vertical axis, the sensor load is
//! not). Lateral shear is the pressure times the tangential component of the
//! local surface normal; vertical shear is a small outward bulge of the
//! compressed pad proportional to the taxel's height.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::outline::ObjectOutline;
use crate::rng::Rng;
use crate::sensor::{FrameMeta, SensorKind, TactileFrame, CHANNELS};
use crate::{Error, Result};

pub const MIN_FORCE_N: f64 = 4.0;
pub const MAX_FORCE_N: f64 = 10.0;
/// Noise σ as a fraction of the press's peak noiseless normal force.
pub const NOISE_FRACTION: f64 = 0.01;
const SUBSAMPLES: usize = 9;
const FORCE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressSpec {
    pub angle_deg: f64,
    pub target_force_n: f64,
    pub sensor: SensorKind,
}

impl PressSpec {
    pub fn validate(&self) -> Result<()> {
        if !(MIN_FORCE_N..=MAX_FORCE_N).contains(&self.target_force_n) {
            return Err(Error::Config(format!(
                "target force {} N outside [{MIN_FORCE_N}, {MAX_FORCE_N}]",
                self.target_force_n
            )));
        }
        if !self.angle_deg.is_finite() {
            return Err(Error::Config("press angle must be finite".into()));
        }
        Ok(())
    }
}

/// Physical taxel arrangement of a sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaxelLayout {
    pub pitch_mm: f64,
    /// Lateral width over which a taxel integrates pressure.
    pub footprint_mm: f64,
    /// Extra protrusion of the centre taxel.
    pub center_offset_mm: f64,
    /// Vertical shear per unit normal force at the outermost row.
    pub bulge: f64,
}

impl TaxelLayout {
    pub fn of(sensor: SensorKind) -> Self {
        match sensor {
            SensorKind::USkin => Self {
                pitch_mm: 4.7,
                footprint_mm: 4.7,
                center_offset_mm: 0.0,
                bulge: 0.12,
            },
            SensorKind::Papill => Self {
                pitch_mm: 7.0,
                footprint_mm: 4.0,
                center_offset_mm: 0.3,
                bulge: 0.06,
            },
        }
    }

    fn offset(index: usize, count: usize, pitch: f64) -> f64 {
        (index as f64 - (count as f64 - 1.0) / 2.0) * pitch
    }

    pub fn column_x(&self, sensor: SensorKind, col: usize) -> f64 {
        Self::offset(col, sensor.spec().cols, self.pitch_mm)
    }

    pub fn row_height(&self, sensor: SensorKind, row: usize) -> f64 {
        Self::offset(row, sensor.spec().rows, self.pitch_mm)
    }

    pub fn row_weight(&self, sensor: SensorKind, row: usize) -> f64 {
        let h = self.row_height(sensor, row) / 10.0;
        (-h * h).exp()
    }
}

/// Penetration (mm) and unit outward surface normal, in press coordinates
/// `[lateral, depth]`, at each taxel centre.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactPatch {
    pub penetration: Vec<f64>,
    pub normals: Vec<[f64; 2]>,
}

/// Result of the force-balance solve for one press.
#[derive(Debug, Clone)]
pub struct ContactSolution {
    /// Sensor-plane advance past the contact origin (mm).
    pub depth_mm: f64,
    pub patch: ContactPatch,
    /// Noiseless `[x, y, z]` force per taxel.
    pub forces: Vec<[f64; CHANNELS]>,
}

struct Sample {
    depth: f64,
    tangent: f64,
    dx: f64,
}

struct Taxel {
    weight: f64,
    offset: f64,
    bulge: f64,
    samples: Vec<Sample>,
}

fn normal_force(taxel: &Taxel, stiffness: f64, advance: f64) -> f64 {
    taxel
        .samples
        .iter()
        .map(|s| (advance + taxel.offset - s.depth).max(0.0) * s.dx)
        .sum::<f64>()
        * stiffness
        * taxel.weight
}

pub fn solve_contact(outline: &ObjectOutline, spec: &PressSpec) -> Result<ContactSolution> {
    spec.validate()?;
    let sensor = spec.sensor;
    let layout = TaxelLayout::of(sensor);
    let grid = sensor.spec();
    let profile = outline.profile(spec.angle_deg)?;
    let max_h = layout.row_height(sensor, grid.rows - 1);

    let mut taxels = Vec::with_capacity(grid.taxels());
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            let xc = layout.column_x(sensor, col);
            let dx = layout.footprint_mm / SUBSAMPLES as f64;
            let samples = (0..SUBSAMPLES)
                .map(|s| {
                    let x = xc - layout.footprint_mm / 2.0 + (s as f64 + 0.5) * dx;
                    let slope = profile.slope_at(x);
                    Sample {
                        depth: profile.depth_at_clamped(x).0,
                        tangent: slope / (1.0 + slope * slope).sqrt(),
                        dx,
                    }
                })
                .collect();
            let centre = row == grid.rows / 2 && col == grid.cols / 2;
            taxels.push(Taxel {
                weight: layout.row_weight(sensor, row),
                offset: if centre { layout.center_offset_mm } else { 0.0 },
                bulge: layout.bulge * layout.row_height(sensor, row) / max_h,
                samples,
            });
        }
    }

    let target = spec.target_force_n;
    let k = outline.stiffness;
    let total = |advance: f64| {
        taxels
            .iter()
            .map(|t| normal_force(t, k, advance))
            .sum::<f64>()
    };

    let mut lo = taxels
        .iter()
        .flat_map(|t| t.samples.iter().map(move |s| s.depth - t.offset))
        .fold(f64::INFINITY, f64::min);
    let mut hi = lo + 1.0;
    let mut doublings = 0;
    while total(hi) < target {
        hi = lo + 2.0 * (hi - lo);
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Simulation(format!(
                "{} at {}°: sensor never reaches {target} N",
                outline.id, spec.angle_deg
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let advance = 0.5 * (lo + hi);
    let reached = total(advance);
    if (reached - target).abs() > FORCE_TOLERANCE * target {
        return Err(Error::Simulation(format!(
            "{} at {}°: force bisection stalled at {reached} N (target {target} N)",
            outline.id, spec.angle_deg
        )));
    }

    let mut forces = Vec::with_capacity(taxels.len());
    let mut penetration = Vec::with_capacity(taxels.len());
    let mut normals = Vec::with_capacity(taxels.len());
    for (i, t) in taxels.iter().enumerate() {
        let fz = normal_force(t, k, advance);
        let fx = t
            .samples
            .iter()
            .map(|s| (advance + t.offset - s.depth).max(0.0) * s.dx * s.tangent)
            .sum::<f64>()
            * k
            * t.weight;
        forces.push([fx, fz * t.bulge, fz]);

        let xc = layout.column_x(sensor, i % grid.cols);
        let (d, _) = profile.depth_at_clamped(xc);
        penetration.push((advance + t.offset - d).max(0.0));
        let slope = profile.slope_at(xc);
        let norm = (1.0 + slope * slope).sqrt();
        normals.push([slope / norm, -1.0 / norm]);
    }

    Ok(ContactSolution {
        depth_mm: advance,
        patch: ContactPatch {
            penetration,
            normals,
        },
        forces,
    })
}

/// Simulates one press. With `noise_seed`, zero-mean Gaussian noise of σ =
/// 1 % of the peak noiseless normal force is added to every channel, after
/// which normal forces are clipped at zero.
pub fn simulate_press(
    outline: &ObjectOutline,
    spec: &PressSpec,
    noise_seed: Option<u64>,
) -> Result<TactileFrame> {
    let mut forces = solve_contact(outline, spec)?.forces;
    if let Some(seed) = noise_seed {
        let peak = forces.iter().map(|f| f[2]).fold(0.0, f64::max);
        let noise = Normal::new(0.0, NOISE_FRACTION * peak)
            .map_err(|e| Error::Simulation(format!("noise distribution: {e}")))?;
        let mut rng = Rng::seed_from_u64(seed);
        for f in &mut forces {
            for v in f.iter_mut() {
                *v += noise.sample(&mut rng);
            }
            f[2] = f[2].max(0.0);
        }
    }
    let meta = FrameMeta {
        object_id: outline.id.clone(),
        material: outline.material,
        angle_deg: spec.angle_deg,
        force_target_n: spec.target_force_n,
    };
    TactileFrame::new(spec.sensor, forces, meta)
}
