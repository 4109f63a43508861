//! Lasing-boundary polylines by marching squares on a boolean map.
//!
//! Samples sit on grid nodes. The boundary crosses an edge between a set and
//! an unset sample at the edge midpoint. Ambiguous squares (diagonal corners
//! set) are resolved by the mean of the four corners, which is exactly 0.5
//! and counts as set, so the two set corners stay connected.

use std::collections::HashMap;

use super::Map2D;

/// Ordered boundary points in (Δ_pump, Δ_cavity), MHz. Closed polylines
/// repeat their first point at the end.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

impl Polyline {
    /// Area-weighted centroid of a closed polyline.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        if !self.closed || self.points.len() < 4 {
            return None;
        }
        let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for w in self.points.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            let cross = x0 * y1 - x1 * y0;
            a += cross;
            cx += (x0 + x1) * cross;
            cy += (y0 + y1) * cross;
        }
        if a == 0.0 {
            return None;
        }
        Some((cx / (3.0 * a), cy / (3.0 * a)))
    }
}

/// Edge between neighbouring samples: horizontal from (ix, iy) to (ix+1, iy),
/// or vertical from (ix, iy) to (ix, iy+1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

impl Edge {
    fn point(self, x: &[f64], y: &[f64]) -> (f64, f64) {
        match self {
            Edge::H(i, j) => (0.5 * (x[i] + x[i + 1]), y[j]),
            Edge::V(i, j) => (x[i], 0.5 * (y[j] + y[j + 1])),
        }
    }
}

pub fn extract_contour(map: &Map2D) -> Vec<Polyline> {
    let (nx, ny) = (map.nx(), map.ny());
    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let bottom = Edge::H(i, j);
            let right = Edge::V(i + 1, j);
            let top = Edge::H(i, j + 1);
            let left = Edge::V(i, j);
            let case = map.is_set(i, j) as u8
                | (map.is_set(i + 1, j) as u8) << 1
                | (map.is_set(i + 1, j + 1) as u8) << 2
                | (map.is_set(i, j + 1) as u8) << 3;
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                4 | 11 => segments.push((right, top)),
                8 | 7 => segments.push((top, left)),
                3 | 12 => segments.push((left, right)),
                6 | 9 => segments.push((bottom, top)),
                // Saddles: cut off the two unset corners.
                5 => {
                    segments.push((bottom, right));
                    segments.push((top, left));
                }
                10 => {
                    segments.push((left, bottom));
                    segments.push((right, top));
                }
                _ => unreachable!(),
            }
        }
    }
    chain(&segments)
        .into_iter()
        .map(|(edges, closed)| Polyline {
            points: edges.into_iter().map(|e| e.point(&map.x, &map.y)).collect(),
            closed,
        })
        .collect()
}

/// Joins segments sharing an edge point. Every point touches one segment (map
/// border) or two, so the result is a set of open paths and cycles.
fn chain(segments: &[(Edge, Edge)]) -> Vec<(Vec<Edge>, bool)> {
    let mut touching: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (s, (a, b)) in segments.iter().enumerate() {
        touching.entry(*a).or_default().push(s);
        touching.entry(*b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let walk = |start: Edge, first: usize, used: &mut [bool]| -> Vec<Edge> {
        let mut path = vec![start];
        let (mut at, mut seg) = (start, first);
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            path.push(next);
            at = next;
            match touching[&at].iter().find(|s| !used[**s]) {
                Some(s) => seg = *s,
                None => return path,
            }
        }
    };

    // Open paths start at border points, in segment order for determinism.
    for (s, (a, b)) in segments.iter().enumerate() {
        for end in [*a, *b] {
            if !used[s] && touching[&end].len() == 1 {
                let path = walk(end, s, &mut used);
                out.push((path, false));
            }
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            let path = walk(segments[s].0, s, &mut used);
            out.push((path, true));
        }
    }
    out
}
