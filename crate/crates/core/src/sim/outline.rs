//! Object cross-sections and the press-aligned view of their surface.

use serde::{Deserialize, Serialize};

use crate::sensor::Material;
use crate::{Error, Result};

pub const RIGID_STIFFNESS: f64 = 0.5;
pub const SOFT_STIFFNESS: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Circle {
        radius: f64,
    },
    /// Closed polygon, counter-clockwise, last vertex joins the first.
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

/// Horizontal cross-section of a press object, centred on the point all
/// press rays converge to. Units are millimetres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectOutline {
    pub id: String,
    pub shape: Shape,
    pub material: Material,
    /// Contact pressure per mm of penetration (N/mm³).
    pub stiffness: f64,
    /// Whether the autoencoder may train on this object.
    pub seen: bool,
    /// Number of 90° re-mountings used to cover the full outline.
    pub rotations: u32,
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(sub(p2, p1), sub(q1, p1));
    let d2 = cross(sub(p2, p1), sub(q2, p1));
    let d3 = cross(sub(q2, q1), sub(p1, q1));
    let d4 = cross(sub(q2, q1), sub(p2, q1));
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0)
}

impl ObjectOutline {
    pub fn new(
        id: impl Into<String>,
        shape: Shape,
        material: Material,
        seen: bool,
        rotations: u32,
    ) -> Result<Self> {
        let stiffness = match material {
            Material::Rigid => RIGID_STIFFNESS,
            Material::Soft => SOFT_STIFFNESS,
        };
        let outline = Self {
            id: id.into(),
            shape,
            material,
            stiffness,
            seen,
            rotations,
        };
        outline.validate()?;
        Ok(outline)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rotations == 0 {
            return Err(Error::Geometry(format!(
                "{}: rotations must be ≥ 1",
                self.id
            )));
        }
        match &self.shape {
            Shape::Circle { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Geometry(format!("{}: bad radius {radius}", self.id)));
                }
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(Error::Geometry(format!(
                        "{}: polygon needs ≥ 3 vertices",
                        self.id
                    )));
                }
                for i in 0..n {
                    for j in i + 1..n {
                        let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                        if !adjacent
                            && segments_cross(
                                vertices[i],
                                vertices[(i + 1) % n],
                                vertices[j],
                                vertices[(j + 1) % n],
                            )
                        {
                            return Err(Error::Geometry(format!(
                                "{}: outline self-intersects",
                                self.id
                            )));
                        }
                    }
                }
                if !self.contains([0.0, 0.0]) {
                    return Err(Error::Geometry(format!(
                        "{}: outline does not contain its centre",
                        self.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Even-odd point-in-outline test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match &self.shape {
            Shape::Circle { radius } => dot(p, p) < radius * radius,
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut inside = false;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    if (a[1] > p[1]) != (b[1] > p[1]) {
                        let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                        if p[0] < x {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }

    /// Where a ray from the centre at `angle_deg` leaves the outline.
    pub fn ray_hit(&self, angle_deg: f64) -> Result<[f64; 2]> {
        let theta = angle_deg.to_radians();
        let dir = [theta.cos(), theta.sin()];
        match &self.shape {
            Shape::Circle { radius } => Ok([radius * dir[0], radius * dir[1]]),
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut best: Option<f64> = None;
                for i in 0..n {
                    let a = vertices[i];
                    let e = sub(vertices[(i + 1) % n], a);
                    let denom = cross(dir, e);
                    if denom.abs() < 1e-15 {
                        continue;
                    }
                    let t = cross(a, e) / denom;
                    let s = cross(a, dir) / denom;
                    if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
                        best = Some(best.map_or(t, |b: f64| b.max(t)));
                    }
                }
                best.map(|t| [t * dir[0], t * dir[1]]).ok_or_else(|| {
                    Error::Geometry(format!(
                        "{}: ray at {angle_deg}° misses the outline",
                        self.id
                    ))
                })
            }
        }
    }

    /// Press-aligned view of the surface around the contact origin at `angle_deg`.
    pub fn profile(&self, angle_deg: f64) -> Result<ContactProfile<'_>> {
        let origin = self.ray_hit(angle_deg)?;
        let theta = angle_deg.to_radians();
        Ok(ContactProfile {
            outline: self,
            origin,
            outward: [theta.cos(), theta.sin()],
            lateral: [-theta.sin(), theta.cos()],
        })
    }

    /// Points along the outline for plotting (circles are sampled).
    pub fn boundary_points(&self, circle_segments: usize) -> Vec<[f64; 2]> {
        match &self.shape {
            Shape::Circle { radius } => (0..circle_segments)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / circle_segments as f64;
                    [radius * t.cos(), radius * t.sin()]
                })
                .collect(),
            Shape::Polygon { vertices } => vertices.clone(),
        }
    }

    /// Distance from `p` to the nearest point of the outline.
    pub fn distance_to_boundary(&self, p: [f64; 2]) -> f64 {
        match &self.shape {
            Shape::Circle { radius } => (dot(p, p).sqrt() - radius).abs(),
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let e = sub(vertices[(i + 1) % n], a);
                        let t = (dot(sub(p, a), e) / dot(e, e)).clamp(0.0, 1.0);
                        let q = [a[0] + t * e[0], a[1] + t * e[1]];
                        dot(sub(p, q), sub(p, q)).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// The outline seen from a sensor pressing along `-outward` onto `origin`.
///
/// Coordinates: `lateral` runs along the sensor surface, depth runs along the
/// press direction. Depth offsets are positive where the material recedes
/// from the tangent plane at the origin.
#[derive(Debug, Clone, Copy)]
pub struct ContactProfile<'a> {
    outline: &'a ObjectOutline,
    pub origin: [f64; 2],
    pub outward: [f64; 2],
    pub lateral: [f64; 2],
}

impl ContactProfile<'_> {
    pub fn to_local(&self, p: [f64; 2]) -> [f64; 2] {
        let d = sub(p, self.origin);
        [dot(d, self.lateral), -dot(d, self.outward)]
    }

    pub fn to_world(&self, lateral: f64, depth: f64) -> [f64; 2] {
        [
            self.origin[0] + lateral * self.lateral[0] - depth * self.outward[0],
            self.origin[1] + lateral * self.lateral[1] - depth * self.outward[1],
        ]
    }

    /// Lateral range covered by the outline.
    pub fn lateral_extent(&self) -> (f64, f64) {
        match &self.outline.shape {
            Shape::Circle { radius } => {
                let c = self.to_local([0.0, 0.0]);
                (c[0] - radius, c[0] + radius)
            }
            Shape::Polygon { vertices } => vertices
                .iter()
                .map(|&v| self.to_local(v)[0])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                }),
        }
    }

    /// Depth of the first surface met at lateral position `x`, if any.
    pub fn depth_at(&self, x: f64) -> Option<f64> {
        match &self.outline.shape {
            Shape::Circle { radius } => {
                let c = self.to_local([0.0, 0.0]);
                let h2 = radius * radius - (x - c[0]) * (x - c[0]);
                (h2 >= 0.0).then(|| c[1] - h2.sqrt())
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut best: Option<f64> = None;
                for i in 0..n {
                    let a = self.to_local(vertices[i]);
                    let b = self.to_local(vertices[(i + 1) % n]);
                    let (lo, hi) = if a[0] <= b[0] { (a, b) } else { (b, a) };
                    if x < lo[0] || x > hi[0] || hi[0] - lo[0] < 1e-12 {
                        continue;
                    }
                    let t = (x - lo[0]) / (hi[0] - lo[0]);
                    let depth = lo[1] + t * (hi[1] - lo[1]);
                    best = Some(best.map_or(depth, |d: f64| d.min(depth)));
                }
                best
            }
        }
    }

    /// Like [`depth_at`](Self::depth_at), but positions past the outline's lateral
    /// extent are clamped to its edge. The flag reports whether clamping happened.
    pub fn depth_at_clamped(&self, x: f64) -> (f64, bool) {
        if let Some(d) = self.depth_at(x) {
            return (d, false);
        }
        let (lo, hi) = self.lateral_extent();
        let span = hi - lo;
        let xc = x.clamp(lo + 1e-9 * span, hi - 1e-9 * span);
        let d = self
            .depth_at(xc)
            .expect("clamped position lies inside the outline's lateral extent");
        (d, true)
    }

    /// Surface slope `d depth / d lateral` by central difference.
    pub fn slope_at(&self, x: f64) -> f64 {
        const H: f64 = 1e-3;
        (self.depth_at_clamped(x + H).0 - self.depth_at_clamped(x - H).0) / (2.0 * H)
    }
}

fn regular_polygon(sides: usize, circumradius: f64, phase_deg: f64) -> Vec<[f64; 2]> {
    (0..sides)
        .map(|i| {
            let t = (phase_deg + 360.0 * i as f64 / sides as f64).to_radians();
            [circumradius * t.cos(), circumradius * t.sin()]
        })
        .collect()
}

/// Convex hexagon with interior angles 80°, 120°, 100°, 140°, 120°, 160°
/// (in boundary order), centred on its area centroid.
pub fn irregular_hexagon() -> Vec<[f64; 2]> {
    let interior = [80.0_f64, 120.0, 100.0, 140.0, 120.0, 160.0];
    let turn: Vec<f64> = interior.iter().map(|a| 180.0 - a).collect();
    let mut heading = vec![0.0_f64];
    for t in &turn[1..] {
        heading.push(heading.last().unwrap() + t);
    }
    let dirs: Vec<[f64; 2]> = heading
        .iter()
        .map(|h| [h.to_radians().cos(), h.to_radians().sin()])
        .collect();
    let fixed = [36.0, 36.0, 24.0, 20.0];
    // The last two edge lengths close the loop.
    let s = (0..4).fold([0.0, 0.0], |acc, i| {
        [
            acc[0] + fixed[i] * dirs[i][0],
            acc[1] + fixed[i] * dirs[i][1],
        ]
    });
    let (d4, d5) = (dirs[4], dirs[5]);
    let det = cross(d4, d5);
    let l4 = cross([-s[0], -s[1]], d5) / det;
    let l5 = cross(d4, [-s[0], -s[1]]) / det;
    let lengths = [fixed[0], fixed[1], fixed[2], fixed[3], l4, l5];

    let mut verts = vec![[0.0, 0.0]];
    for i in 0..5 {
        let p = verts[i];
        verts.push([
            p[0] + lengths[i] * dirs[i][0],
            p[1] + lengths[i] * dirs[i][1],
        ]);
    }

    let (mut area, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..6 {
        let a = verts[i];
        let b = verts[(i + 1) % 6];
        let c = cross(a, b);
        area += c;
        cx += (a[0] + b[0]) * c;
        cy += (a[1] + b[1]) * c;
    }
    area *= 0.5;
    let (cx, cy) = (cx / (6.0 * area), cy / (6.0 * area));
    verts.iter().map(|v| [v[0] - cx, v[1] - cy]).collect()
}

/// The six seen objects (circle, square and hexagon prisms in rigid and soft
/// variants) followed by the unseen irregular hexagon.
pub fn builtin_objects() -> Vec<ObjectOutline> {
    let shapes = [
        ("circle", Shape::Circle { radius: 20.0 }),
        (
            "square",
            Shape::Polygon {
                vertices: regular_polygon(4, 20.0 * 2f64.sqrt(), 45.0),
            },
        ),
        (
            "hexagon",
            Shape::Polygon {
                vertices: regular_polygon(6, 22.0, 0.0),
            },
        ),
    ];
    let mut objects = Vec::with_capacity(7);
    for (name, shape) in &shapes {
        for (suffix, material) in [("rigid", Material::Rigid), ("soft", Material::Soft)] {
            objects.push(
                ObjectOutline::new(format!("{name}-{suffix}"), shape.clone(), material, true, 1)
                    .expect("builtin outline is valid"),
            );
        }
    }
    objects.push(
        ObjectOutline::new(
            "irregular",
            Shape::Polygon {
                vertices: irregular_hexagon(),
            },
            Material::Rigid,
            false,
            4,
        )
        .expect("builtin outline is valid"),
    );
    objects
}

pub fn find_object<'a>(objects: &'a [ObjectOutline], id: &str) -> Result<&'a ObjectOutline> {
    objects
        .iter()
        .find(|o| o.id == id)
        .ok_or_else(|| Error::Data(format!("unknown object '{id}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interior_angles(v: &[[f64; 2]]) -> Vec<f64> {
        let n = v.len();
        (0..n)
            .map(|i| {
                let a = sub(v[(i + n - 1) % n], v[i]);
                let b = sub(v[(i + 1) % n], v[i]);
                (dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt()))
                    .acos()
                    .to_degrees()
            })
            .collect()
    }

    #[test]
    fn builtin_counts() {
        let objs = builtin_objects();
        assert_eq!(objs.len(), 7);
        assert_eq!(objs.iter().filter(|o| o.seen).count(), 6);
        assert_eq!(objs.iter().filter(|o| !o.seen).count(), 1);
        let soft = objs.iter().filter(|o| o.material == Material::Soft).count();
        assert_eq!(soft, 3);
        for o in &objs {
            o.validate().unwrap();
        }
    }

    #[test]
    fn circle_points_equidistant() {
        let objs = builtin_objects();
        let circle = find_object(&objs, "circle-rigid").unwrap();
        for p in circle.boundary_points(64) {
            assert!((dot(p, p).sqrt() - 20.0).abs() < 1e-12);
        }
        for a in [0.0, 17.0, 45.0, 90.0] {
            let p = circle.ray_hit(a).unwrap();
            assert!((dot(p, p).sqrt() - 20.0).abs() < 1e-12);
        }
    }

    #[test]
    fn irregular_hexagon_corners() {
        let v = irregular_hexagon();
        let mut angles = interior_angles(&v);
        angles.sort_by(f64::total_cmp);
        let expected = [80.0, 100.0, 120.0, 120.0, 140.0, 160.0];
        for (a, e) in angles.iter().zip(expected) {
            assert!((a - e).abs() < 1e-9, "{angles:?}");
        }
        let o = ObjectOutline::new(
            "x",
            Shape::Polygon { vertices: v },
            Material::Rigid,
            false,
            4,
        )
        .unwrap();
        assert!(o.contains([0.0, 0.0]));
    }

    #[test]
    fn self_intersecting_polygon_is_rejected() {
        let bow = vec![[-1.0, -1.0], [1.0, 1.0], [1.0, -1.0], [-1.0, 1.0]];
        let res = ObjectOutline::new(
            "bow",
            Shape::Polygon { vertices: bow },
            Material::Rigid,
            true,
            1,
        );
        assert!(matches!(res, Err(Error::Geometry(_))));
    }

    #[test]
    fn off_centre_polygon_is_rejected() {
        let tri = vec![[1.0, 1.0], [3.0, 1.0], [2.0, 3.0]];
        assert!(ObjectOutline::new(
            "t",
            Shape::Polygon { vertices: tri },
            Material::Rigid,
            true,
            1
        )
        .is_err());
    }

    #[test]
    fn square_face_profile_is_flat() {
        let objs = builtin_objects();
        let sq = find_object(&objs, "square-rigid").unwrap();
        let prof = sq.profile(0.0).unwrap();
        assert!((prof.origin[0] - 20.0).abs() < 1e-12 && prof.origin[1].abs() < 1e-12);
        for x in [-15.0, -7.0, 0.0, 3.3, 19.0] {
            assert!(prof.depth_at(x).unwrap().abs() < 1e-12);
        }
        assert!(prof.depth_at(21.0).is_none());
        let (d, clamped) = prof.depth_at_clamped(25.0);
        assert!(clamped && d.abs() < 1e-9);
    }

    #[test]
    fn local_world_roundtrip() {
        let objs = builtin_objects();
        let prof = objs[6].profile(33.0).unwrap();
        let p = prof.to_world(2.5, 1.25);
        let q = prof.to_local(p);
        assert!((q[0] - 2.5).abs() < 1e-12 && (q[1] - 1.25).abs() < 1e-12);
    }
}
