//! Connected set regions of a boolean map.

use super::Map2D;

#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    /// (ix, iy) of member cells, in scan order.
    pub cells: Vec<(usize, usize)>,
    /// Mean Δ_pump of the members, MHz.
    pub centroid_x: f64,
    /// Mean Δ_cavity of the members, MHz.
    pub centroid_y: f64,
    pub touches_border: bool,
}

impl Region {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// 4-connected components of set cells, largest first.
pub fn lasing_regions(map: &Map2D) -> Vec<Region> {
    let (nx, ny) = (map.nx(), map.ny());
    let mut label = vec![usize::MAX; nx * ny];
    let mut regions = Vec::new();
    for start in 0..nx * ny {
        if label[start] != usize::MAX || !map.is_set(start % nx, start / nx) {
            continue;
        }
        let id = regions.len();
        let mut stack = vec![start];
        label[start] = id;
        let mut cells = Vec::new();
        while let Some(k) = stack.pop() {
            let (i, j) = (k % nx, k / nx);
            cells.push((i, j));
            let mut visit = |ii: usize, jj: usize| {
                let kk = jj * nx + ii;
                if label[kk] == usize::MAX && map.is_set(ii, jj) {
                    label[kk] = id;
                    stack.push(kk);
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < nx {
                visit(i + 1, j);
            }
            if j > 0 {
                visit(i, j - 1);
            }
            if j + 1 < ny {
                visit(i, j + 1);
            }
        }
        cells.sort_by_key(|&(i, j)| (j, i));
        let n = cells.len() as f64;
        regions.push(Region {
            centroid_x: cells.iter().map(|c| map.x[c.0]).sum::<f64>() / n,
            centroid_y: cells.iter().map(|c| map.y[c.1]).sum::<f64>() / n,
            touches_border: cells.iter().any(|&(i, j)| i == 0 || j == 0 || i + 1 == nx || j + 1 == ny),
            cells,
        });
    }
    regions.sort_by_key(|r| std::cmp::Reverse(r.len()));
    regions
}
