//! SVG heatmaps of maps with optional contour overlay.
//!
//! Each sample is drawn as a rectangle centred on its grid node and one grid
//! spacing wide. Fill is linear in the value between `low` (minimum finite
//! value) and `high` (maximum); NaN cells get `missing`.

use std::fmt::Write as _;

use crate::sweep::{Map2D, Polyline};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatmapStyle {
    pub low: [u8; 3],
    pub high: [u8; 3],
    pub missing: [u8; 3],
    /// Plot area size in px.
    pub width: f64,
    pub height: f64,
    /// Space left for axis labels, px.
    pub margin: f64,
}

impl Default for HeatmapStyle {
    fn default() -> Self {
        Self {
            low: [0x00, 0x00, 0x8b],
            high: [0x8b, 0x00, 0x00],
            missing: [0xd3, 0xd3, 0xd3],
            width: 480.0,
            height: 480.0,
            margin: 60.0,
        }
    }
}

/// Affine map from (Δ_pump, Δ_cavity) in MHz to SVG px. y increases upward
/// in data and downward on screen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotTransform {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl PlotTransform {
    /// Extent covers the outer edges of the border cells.
    pub fn for_map(map: &Map2D, style: &HeatmapStyle) -> Self {
        let (hx, hy) = half_steps(map);
        Self {
            x_lo: map.x[0] - hx,
            x_hi: map.x[map.nx() - 1] + hx,
            y_lo: map.y[0] - hy,
            y_hi: map.y[map.ny() - 1] + hy,
            left: style.margin,
            top: style.margin / 2.0,
            width: style.width,
            height: style.height,
        }
    }

    pub fn apply(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (
            self.left + (x - self.x_lo) / (self.x_hi - self.x_lo) * self.width,
            self.top + (self.y_hi - y) / (self.y_hi - self.y_lo) * self.height,
        )
    }
}

fn half_steps(map: &Map2D) -> (f64, f64) {
    let step = |v: &[f64]| if v.len() > 1 { 0.5 * (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64 } else { 0.5 };
    (step(&map.x), step(&map.y))
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn lerp(a: [u8; 3], b: [u8; 3], t: f64) -> [u8; 3] {
    let mut out = [0; 3];
    for k in 0..3 {
        out[k] = (a[k] as f64 + (b[k] as f64 - a[k] as f64) * t).round() as u8;
    }
    out
}

pub fn render_heatmap(map: &Map2D, style: &HeatmapStyle, contours: Option<&[Polyline]>, title: &str) -> String {
    let tf = PlotTransform::for_map(map, style);
    let total_w = style.width + 1.5 * style.margin;
    let total_h = style.height + 1.5 * style.margin;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));

    let finite: Vec<f64> = map.values.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (hx, hy) = half_steps(map);

    let _ = writeln!(s, r#"<g id="cells" shape-rendering="crispEdges">"#);
    if !finite.is_empty() {
        for iy in 0..map.ny() {
            for ix in 0..map.nx() {
                let v = map.get(ix, iy);
                let fill = if v.is_finite() {
                    let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
                    lerp(style.low, style.high, t)
                } else {
                    style.missing
                };
                let (x0, y0) = tf.apply((map.x[ix] - hx, map.y[iy] + hy));
                let (x1, y1) = tf.apply((map.x[ix] + hx, map.y[iy] - hy));
                let _ = writeln!(
                    s,
                    r#"<rect x="{x0:.3}" y="{y0:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                    x1 - x0,
                    y1 - y0,
                    hex(fill)
                );
            }
        }
    }
    let _ = writeln!(s, "</g>");

    if let Some(lines) = contours {
        let _ = writeln!(s, r#"<g id="contours" fill="none" stroke="white" stroke-width="1.5">"#);
        for line in lines {
            let pts: Vec<String> = line
                .points
                .iter()
                .map(|p| {
                    let (x, y) = tf.apply(*p);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            let _ = writeln!(s, r#"<polyline points="{}"/>"#, pts.join(" "));
        }
        let _ = writeln!(s, "</g>");
    }

    axes(&mut s, &tf, style);
    if finite.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle" font-size="20">no data</text>"#,
            tf.left + tf.width / 2.0,
            tf.top + tf.height / 2.0
        );
    } else {
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="11">range {} .. {}</text>"#,
            tf.left,
            tf.top - 8.0,
            fmt_num(lo),
            fmt_num(hi)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn axes(s: &mut String, tf: &PlotTransform, style: &HeatmapStyle) {
    let _ = writeln!(
        s,
        r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="black"/>"#,
        tf.left, tf.top, tf.width, tf.height
    );
    let bottom = tf.top + tf.height;
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = tf.x_lo + f * (tf.x_hi - tf.x_lo);
        let (px, _) = tf.apply((xv, tf.y_lo));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.3}" y1="{bottom:.3}" x2="{px:.3}" y2="{:.3}" stroke="black"/><text x="{px:.3}" y="{:.3}" text-anchor="middle" font-size="11">{}</text>"#,
            bottom + 5.0,
            bottom + 18.0,
            fmt_num(xv)
        );
        let yv = tf.y_lo + f * (tf.y_hi - tf.y_lo);
        let (_, py) = tf.apply((tf.x_lo, yv));
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{py:.3}" x2="{:.3}" y2="{py:.3}" stroke="black"/><text x="{:.3}" y="{:.3}" text-anchor="end" font-size="11">{}</text>"#,
            tf.left - 5.0,
            tf.left,
            tf.left - 8.0,
            py + 4.0,
            fmt_num(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle" font-size="13">Δ_pump (MHz)</text>"#,
        tf.left + tf.width / 2.0,
        bottom + style.margin * 0.6
    );
    let (cx, cy) = (style.margin * 0.25, tf.top + tf.height / 2.0);
    let _ = writeln!(
        s,
        r#"<text x="{cx:.3}" y="{cy:.3}" text-anchor="middle" font-size="13" transform="rotate(-90 {cx:.3} {cy:.3})">Δ_cavity (MHz)</text>"#
    );
}

fn fmt_num(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        "0".into()
    } else {
        r.to_string()
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SimConfig;
    use crate::model::OperatingPoint;
    use crate::sweep::{extract_contour, GridSpec, MapMetadata, Task};
    use std::collections::BTreeSet;

    fn map(nx: usize, ny: usize, f: impl Fn(usize, usize) -> f64) -> Map2D {
        let grid = GridSpec {
            x_min: -4.0,
            x_max: 8.0,
            nx,
            y_min: -40.0,
            y_max: -20.0,
            ny,
            base: OperatingPoint::default(),
            task: Task::Threshold,
        };
        let mut values = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                values.push(f(i, j));
            }
        }
        Map2D {
            x: grid.x_axis(),
            y: grid.y_axis(),
            values,
            metadata: MapMetadata {
                grid,
                sim: SimConfig::default(),
                code_version: String::new(),
                grid_hash: String::new(),
                workers: 1,
                elapsed_s: 0.0,
                resumed_cells: 0,
                errors: vec![],
            },
        }
    }

    fn fills(svg: &str) -> Vec<String> {
        svg.lines()
            .filter(|l| l.starts_with("<rect x") && !l.contains("fill=\"none\""))
            .map(|l| l.split("fill=\"").nth(1).unwrap()[..7].to_string())
            .collect()
    }

    #[test]
    fn uniform_map_single_fill() {
        let svg = render_heatmap(&map(4, 3, |_, _| 0.7), &HeatmapStyle::default(), None, "u");
        let f = fills(&svg);
        assert_eq!(f.len(), 12);
        assert_eq!(f.iter().collect::<BTreeSet<_>>().len(), 1);
        assert!(svg.contains("Δ_pump (MHz)") && svg.contains("Δ_cavity (MHz)"));
    }

    #[test]
    fn two_values_use_endpoint_colors() {
        let svg = render_heatmap(&map(4, 4, |i, _| (i % 2) as f64), &HeatmapStyle::default(), None, "b");
        let set: BTreeSet<String> = fills(&svg).into_iter().collect();
        assert_eq!(set, ["#00008b".to_string(), "#8b0000".to_string()].into_iter().collect());
    }

    #[test]
    fn all_nan_says_no_data() {
        let svg = render_heatmap(&map(3, 3, |_, _| f64::NAN), &HeatmapStyle::default(), None, "n");
        assert!(svg.contains(">no data<"));
        assert!(fills(&svg).is_empty());
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn contour_coordinates_follow_transform() {
        let m = map(12, 10, |i, j| {
            let (dx, dy) = (i as f64 - 5.0, j as f64 - 4.0);
            if dx * dx / 9.0 + dy * dy / 6.0 <= 1.0 { 1.0 } else { 0.0 }
        });
        let lines = extract_contour(&m);
        let style = HeatmapStyle::default();
        let svg = render_heatmap(&m, &style, Some(&lines), "c");
        let tf = PlotTransform::for_map(&m, &style);
        let drawn: Vec<&str> = svg.lines().filter(|l| l.starts_with("<polyline")).collect();
        assert_eq!(drawn.len(), lines.len());
        for (line, d) in lines.iter().zip(drawn) {
            let pts: Vec<(f64, f64)> = d.split('"').nth(1).unwrap().split(' ').map(|p| {
                let (a, b) = p.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            }).collect();
            assert_eq!(pts.len(), line.points.len());
            for (p, q) in line.points.iter().zip(pts) {
                let e = tf.apply(*p);
                assert!((e.0 - q.0).abs() < 1e-3 && (e.1 - q.1).abs() < 1e-3);
            }
        }
        // Corners of the data extent land on the plot frame.
        assert_eq!(tf.apply((tf.x_lo, tf.y_hi)), (tf.left, tf.top));
    }
}
