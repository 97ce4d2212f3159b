//! SVG output: taxel quiver plots and geometry overlays.
//!
//! Numbers are written with fixed precision so identical inputs give
//! byte-identical files.

use std::fmt::Write;

use crate::sensor::TactileFrame;
use crate::sim::ObjectOutline;
use crate::{Error, Result};

const CELL_PX: f64 = 60.0;
const PANEL_GAP_PX: f64 = 30.0;
const TITLE_PX: f64 = 24.0;

/// Blue (low) to yellow (high) ramp over `t` in [0, 1].
fn ramp(t: f64) -> String {
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(40.0, 250.0),
        lerp(50.0, 220.0),
        lerp(140.0, 40.0)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Side-by-side quiver panels sharing one colour and arrow scale. Each taxel
/// is a cell coloured by its normal force with an arrow for its shear.
pub fn quiver_svg(panels: &[(&str, &TactileFrame)]) -> Result<String> {
    if panels.is_empty() {
        return Err(Error::Usage("nothing to plot".into()));
    }
    let normal_max = panels
        .iter()
        .flat_map(|(_, f)| f.forces().iter().map(|t| t[2]))
        .fold(0.0_f64, f64::max);
    let shear_max = panels
        .iter()
        .flat_map(|(_, f)| f.forces().iter().map(|t| t[0].hypot(t[1])))
        .fold(0.0_f64, f64::max);

    let widths: Vec<f64> = panels
        .iter()
        .map(|(_, f)| f.sensor().spec().cols as f64 * CELL_PX)
        .collect();
    let width = widths.iter().sum::<f64>() + PANEL_GAP_PX * (panels.len() + 1) as f64;
    let height = panels
        .iter()
        .map(|(_, f)| f.sensor().spec().rows as f64 * CELL_PX)
        .fold(0.0, f64::max)
        + TITLE_PX
        + 2.0 * PANEL_GAP_PX;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    )
    .unwrap();
    writeln!(
        out,
        r##"<defs><marker id="head" viewBox="0 0 10 10" refX="8" refY="5" markerWidth="5" markerHeight="5" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#000"/></marker></defs>"##
    )
    .unwrap();
    let mut x0 = PANEL_GAP_PX;
    for ((title, frame), w) in panels.iter().zip(&widths) {
        let spec = frame.sensor().spec();
        let y0 = PANEL_GAP_PX + TITLE_PX;
        writeln!(out, r#"<g class="panel" data-sensor="{}">"#, spec.id).unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="14">{}</text>"#,
            x0,
            y0 - 8.0,
            escape(title)
        )
        .unwrap();
        for r in 0..spec.rows {
            for c in 0..spec.cols {
                let [fx, fy, fz] = frame.taxel(r, c);
                let cx = x0 + c as f64 * CELL_PX;
                let cy = y0 + r as f64 * CELL_PX;
                let fill = ramp(if normal_max > 0.0 {
                    fz / normal_max
                } else {
                    0.0
                });
                writeln!(
                    out,
                    r##"<rect class="taxel" x="{cx:.2}" y="{cy:.2}" width="{CELL_PX:.0}" height="{CELL_PX:.0}" fill="{fill}" stroke="#fff"/>"##
                )
                .unwrap();
                let scale = if shear_max > 0.0 {
                    0.45 * CELL_PX / shear_max
                } else {
                    0.0
                };
                let (mx, my) = (cx + CELL_PX / 2.0, cy + CELL_PX / 2.0);
                writeln!(
                    out,
                    r##"<line class="arrow" x1="{mx:.2}" y1="{my:.2}" x2="{:.2}" y2="{:.2}" stroke="#000" stroke-width="2" marker-end="url(#head)"/>"##,
                    mx + fx * scale,
                    my - fy * scale
                )
                .unwrap();
            }
        }
        writeln!(out, "</g>").unwrap();
        x0 += w + PANEL_GAP_PX;
    }
    writeln!(
        out,
        r#"<text x="{PANEL_GAP_PX:.0}" y="{:.1}" font-family="sans-serif" font-size="11">normal max {normal_max:.4} N, shear max {shear_max:.4} N</text>"#,
        height - 8.0
    )
    .unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}

const MM_PX: f64 = 8.0;

/// Object outline with predicted (and optionally true) contact points, in mm
/// scaled to pixels, y up.
pub fn geometry_svg(
    outline: &ObjectOutline,
    predicted: &[[f64; 2]],
    truth: Option<&[[f64; 2]]>,
) -> String {
    let boundary = outline.boundary_points(180);
    let extent = boundary
        .iter()
        .chain(predicted)
        .chain(truth.unwrap_or(&[]))
        .filter(|p| p[0].is_finite() && p[1].is_finite())
        .fold(0.0_f64, |m, p| m.max(p[0].abs()).max(p[1].abs()))
        + 5.0;
    let size = 2.0 * extent * MM_PX;
    let px = |p: &[f64; 2]| ((p[0] + extent) * MM_PX, (extent - p[1]) * MM_PX);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.2} {size:.2}">"#
    )
    .unwrap();
    let mut d = String::new();
    for (i, p) in boundary.iter().enumerate() {
        let (x, y) = px(p);
        write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" }).unwrap();
    }
    d.push('Z');
    writeln!(
        out,
        r##"<path class="outline" data-object="{}" d="{d}" fill="none" stroke="#333" stroke-width="1.5"/>"##,
        escape(&outline.id)
    )
    .unwrap();
    for p in truth.unwrap_or(&[]) {
        let (x, y) = px(p);
        writeln!(
            out,
            r##"<circle class="truth" cx="{x:.3}" cy="{y:.3}" r="1.5" fill="#2a8"/>"##
        )
        .unwrap();
    }
    for p in predicted {
        let (x, y) = px(p);
        writeln!(
            out,
            r##"<circle class="pred" cx="{x:.3}" cy="{y:.3}" r="1.5" fill="#d33"/>"##
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::{FrameMeta, Material, SensorKind};
    use crate::sim::{builtin_objects, find_object};

    fn frame(sensor: SensorKind) -> TactileFrame {
        let n = sensor.spec().taxels();
        let forces = (0..n)
            .map(|i| [0.01 * i as f64, -0.02, 0.1 * i as f64])
            .collect();
        let meta = FrameMeta {
            object_id: "circle-rigid".into(),
            material: Material::Rigid,
            angle_deg: 0.0,
            force_target_n: 5.0,
        };
        TactileFrame::new(sensor, forces, meta).unwrap()
    }

    #[test]
    fn uskin_grid_has_24_cells_and_arrows() {
        let svg = quiver_svg(&[("uSkin", &frame(SensorKind::USkin))]).unwrap();
        assert_eq!(svg.matches(r#"class="taxel""#).count(), 24);
        assert_eq!(svg.matches(r#"class="arrow""#).count(), 24);
    }

    #[test]
    fn panels_sum_cells() {
        let u = frame(SensorKind::USkin);
        let p = frame(SensorKind::Papill);
        let svg = quiver_svg(&[("a", &u), ("b", &p)]).unwrap();
        assert_eq!(svg.matches(r#"class="taxel""#).count(), 33);
        assert_eq!(svg, quiver_svg(&[("a", &u), ("b", &p)]).unwrap());
        assert!(quiver_svg(&[]).is_err());
    }

    #[test]
    fn colours_span_the_ramp() {
        assert_eq!(ramp(0.0), "#28328c");
        assert_eq!(ramp(1.0), "#fadc28");
        assert_eq!(ramp(f64::NAN), ramp(0.0));
    }

    #[test]
    fn overlay_has_outline_and_points() {
        let objs = builtin_objects();
        let irr = find_object(&objs, "irregular").unwrap();
        let svg = geometry_svg(irr, &[[1.0, 2.0], [3.0, 4.0]], Some(&[[0.0, 0.0]]));
        assert_eq!(svg.matches(r#"class="outline""#).count(), 1);
        assert_eq!(svg.matches(r#"class="pred""#).count(), 2);
        assert_eq!(svg.matches(r#"class="truth""#).count(), 1);
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
