//! Parameter maps over (Δ_pump, Δ_cavity).
//!
//! Every cell is an independent pure computation. Cells are evaluated on a
//! worker pool but stored by index, so the map does not depend on the number
//! of workers. Each cell gets its own RNG seed derived from the grid and its
//! indices.

pub mod checkpoint;
pub mod contour;
pub mod region;

use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dynamics::{simulate, SimConfig};
use crate::error::NumericalError;
use crate::model::{technical, OperatingPoint};
use crate::threshold::{is_lasing, small_signal_gain};

pub use checkpoint::Checkpoint;
pub use contour::{extract_contour, Polyline};
pub use region::{lasing_regions, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// 1 where the small-signal gain exceeds the cavity loss, else 0.
    Threshold,
    /// Small-signal gain, MHz.
    Gain,
    /// Lasing frequency minus Δ_cavity, MHz; NaN below threshold.
    Frequency,
    /// Mean intracavity photon number from the dynamics; 0 below threshold.
    Photons,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Threshold => "threshold",
            Task::Gain => "gain",
            Task::Frequency => "frequency",
            Task::Photons => "photons",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "threshold" => Some(Task::Threshold),
            "gain" => Some(Task::Gain),
            "frequency" => Some(Task::Frequency),
            "photons" => Some(Task::Photons),
            _ => None,
        }
    }
}

/// Grid over Δ_pump (x) and Δ_cavity (y), both MHz, with endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
    pub base: OperatingPoint,
    pub task: Task,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(SweepError::Grid(format!("need at least 2×2 cells, got {}×{}", self.nx, self.ny)));
        }
        if !(self.x_min < self.x_max) || !(self.y_min < self.y_max) {
            return Err(SweepError::Grid("axis minimum must be below maximum".into()));
        }
        self.base
            .validate()
            .map_err(|e| SweepError::Grid(e.to_string()))
    }

    pub fn x_axis(&self) -> Vec<f64> {
        axis(self.x_min, self.x_max, self.nx)
    }

    pub fn y_axis(&self) -> Vec<f64> {
        axis(self.y_min, self.y_max, self.ny)
    }

    pub fn point(&self, ix: usize, iy: usize) -> OperatingPoint {
        OperatingPoint {
            delta_pump: axis_value(self.x_min, self.x_max, self.nx, ix),
            delta_cavity: axis_value(self.y_min, self.y_max, self.ny, iy),
            ..self.base
        }
    }
}

fn axis_value(min: f64, max: f64, n: usize, i: usize) -> f64 {
    if i + 1 == n {
        max
    } else {
        min + (max - min) * i as f64 / (n - 1) as f64
    }
}

fn axis(min: f64, max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| axis_value(min, max, n, i)).collect()
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("checkpoint {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint {path} was written for a different grid (hash {found}, expected {expected})")]
    CheckpointMismatch { path: String, found: String, expected: String },
    #[error("checkpoint {path} is malformed at line {line}")]
    CheckpointFormat { path: String, line: usize },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub ix: usize,
    pub iy: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub grid: GridSpec,
    pub sim: SimConfig,
    pub code_version: String,
    pub grid_hash: String,
    pub workers: usize,
    pub elapsed_s: f64,
    pub resumed_cells: usize,
    pub errors: Vec<CellError>,
}

/// Result scalars on the grid. `values[iy * nx + ix]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Map2D {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<f64>,
    pub metadata: MapMetadata,
}

impl Map2D {
    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.x.len() + ix]
    }

    /// Cells with a finite value above one half.
    pub fn is_set(&self, ix: usize, iy: usize) -> bool {
        self.get(ix, iy) > 0.5
    }
}

/// Stable digest of the grid and simulation settings. Keys checkpoints and
/// per-cell seeds.
pub fn grid_hash(grid: &GridSpec, cfg: &SimConfig) -> String {
    let record = serde_json::json!({ "grid": grid, "sim": cfg });
    let digest = Sha256::digest(record.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn cell_seed(hash: &str, ix: usize, iy: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(hash.as_bytes());
    h.update((ix as u64).to_le_bytes());
    h.update((iy as u64).to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

/// Value of one cell. Below-threshold frequency cells are NaN, not errors.
pub fn evaluate_cell(task: Task, op: &OperatingPoint, cfg: &SimConfig) -> Result<f64, NumericalError> {
    match task {
        Task::Threshold => Ok(if is_lasing(op)?.lasing { 1.0 } else { 0.0 }),
        Task::Gain => Ok(technical(small_signal_gain(op)?.gain)),
        Task::Frequency | Task::Photons => {
            let below = if task == Task::Frequency { f64::NAN } else { 0.0 };
            if !is_lasing(op)?.lasing {
                return Ok(below);
            }
            match simulate(op, cfg) {
                Ok(r) if task == Task::Frequency => Ok(r.shift),
                Ok(r) => Ok(r.mean_photons),
                Err(NumericalError::BelowThreshold { .. }) => Ok(below),
                Err(e) => Err(e),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions<'a> {
    /// Worker threads; 0 means one per available core.
    pub workers: usize,
    /// Append finished cells here and skip cells already present.
    pub checkpoint: Option<&'a Path>,
}

pub fn run_map(grid: &GridSpec, cfg: &SimConfig, opts: RunOptions<'_>) -> Result<Map2D, SweepError> {
    grid.validate()?;
    if matches!(grid.task, Task::Frequency | Task::Photons) {
        // Catch an unusable step before any cell runs.
        let corners = [(0, 0), (grid.nx - 1, 0), (0, grid.ny - 1), (grid.nx - 1, grid.ny - 1)];
        let widest = corners
            .iter()
            .map(|&(ix, iy)| grid.point(ix, iy).max_abs_detuning())
            .fold(0.0, f64::max);
        cfg.validate()
            .and_then(|_| cfg.effective_stride(widest))
            .map_err(|e| SweepError::Grid(e.to_string()))?;
    }
    let started = Instant::now();
    let hash = grid_hash(grid, cfg);
    let (nx, ny) = (grid.nx, grid.ny);
    let mut values = vec![f64::NAN; nx * ny];
    let mut done = vec![false; nx * ny];

    let mut writer = match opts.checkpoint {
        Some(path) => {
            let (ck, finished) = Checkpoint::open(path, &hash, nx, ny)?;
            for (ix, iy, v) in finished {
                values[iy * nx + ix] = v;
                done[iy * nx + ix] = true;
            }
            Some(ck)
        }
        None => None,
    };
    let resumed_cells = done.iter().filter(|d| **d).count();

    let pending: Vec<usize> = (0..nx * ny).filter(|k| !done[*k]).collect();
    let workers = if opts.workers == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        opts.workers
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;

    let (tx, rx) = mpsc::channel::<(usize, Result<f64, NumericalError>)>();
    let mut errors = Vec::new();
    let mut write_err = None;
    std::thread::scope(|scope| {
        scope.spawn(|| {
            pool.install(|| {
                pending.par_iter().for_each_with(tx, |tx, &k| {
                    let (ix, iy) = (k % nx, k / nx);
                    let cell_cfg = SimConfig {
                        rng_seed: cell_seed(&hash, ix, iy),
                        ..*cfg
                    };
                    let v = evaluate_cell(grid.task, &grid.point(ix, iy), &cell_cfg);
                    // The receiver lives until every sender is dropped.
                    let _ = tx.send((k, v));
                });
            });
        });
        // Single writer: results are recorded and checkpointed here only.
        for (k, v) in rx {
            let (ix, iy) = (k % nx, k / nx);
            match v {
                Ok(v) => {
                    values[k] = v;
                    if let Some(w) = writer.as_mut() {
                        if let Err(e) = w.append(ix, iy, v) {
                            write_err.get_or_insert(e);
                        }
                    }
                }
                Err(e) => errors.push(CellError {
                    ix,
                    iy,
                    message: e.to_string(),
                }),
            }
        }
    });
    if let Some(e) = write_err {
        return Err(e);
    }
    errors.sort_by_key(|e| (e.iy, e.ix));

    Ok(Map2D {
        x: grid.x_axis(),
        y: grid.y_axis(),
        values,
        metadata: MapMetadata {
            grid: *grid,
            sim: *cfg,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            grid_hash: hash,
            workers,
            elapsed_s: started.elapsed().as_secs_f64(),
            resumed_cells,
            errors,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid(task: Task) -> GridSpec {
        GridSpec {
            x_min: -4.0,
            x_max: 8.0,
            nx: 7,
            y_min: -40.0,
            y_max: -20.0,
            ny: 5,
            base: OperatingPoint::default(),
            task,
        }
    }

    #[test]
    fn axes_include_endpoints() {
        let g = small_grid(Task::Threshold);
        let x = g.x_axis();
        assert_eq!(x.first(), Some(&-4.0));
        assert_eq!(x.last(), Some(&8.0));
        assert_eq!(x[3], 2.0);
        assert_eq!(g.point(6, 4).delta_cavity, -20.0);
    }

    #[test]
    fn invalid_grids_rejected() {
        let mut g = small_grid(Task::Threshold);
        g.nx = 1;
        assert!(g.validate().is_err());
        let mut g = small_grid(Task::Threshold);
        g.y_max = g.y_min;
        assert!(g.validate().is_err());
    }

    #[test]
    fn unpumped_map_is_all_false() {
        let mut g = small_grid(Task::Threshold);
        g.nx = 2;
        g.ny = 2;
        g.base.omega_pump = 0.0;
        let m = run_map(&g, &SimConfig::default(), RunOptions { workers: 1, checkpoint: None }).unwrap();
        assert!(m.values.iter().all(|v| *v == 0.0));
        assert!(m.metadata.errors.is_empty());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let g = small_grid(Task::Gain);
        let cfg = SimConfig::default();
        let one = run_map(&g, &cfg, RunOptions { workers: 1, checkpoint: None }).unwrap();
        let four = run_map(&g, &cfg, RunOptions { workers: 4, checkpoint: None }).unwrap();
        let bits = |m: &Map2D| m.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&one), bits(&four));
    }

    #[test]
    fn seeds_differ_per_cell_and_grid() {
        let g = small_grid(Task::Frequency);
        let cfg = SimConfig::default();
        let h = grid_hash(&g, &cfg);
        assert_ne!(cell_seed(&h, 0, 1), cell_seed(&h, 1, 0));
        let mut g2 = g;
        g2.nx += 1;
        assert_ne!(h, grid_hash(&g2, &cfg));
        assert_eq!(h, grid_hash(&g, &cfg));
    }

    #[test]
    fn coarse_step_rejected_before_running() {
        let cfg = SimConfig {
            dt: 0.01,
            ..SimConfig::default()
        };
        let g = small_grid(Task::Frequency);
        assert!(matches!(run_map(&g, &cfg, RunOptions::default()), Err(SweepError::Grid(_))));
        assert!(run_map(&small_grid(Task::Threshold), &cfg, RunOptions { workers: 1, checkpoint: None }).is_ok());
    }

    #[test]
    fn frequency_cells_skip_below_threshold() {
        let op = OperatingPoint {
            omega_pump: 0.0,
            ..OperatingPoint::default()
        };
        assert!(evaluate_cell(Task::Frequency, &op, &SimConfig::default()).unwrap().is_nan());
        assert_eq!(evaluate_cell(Task::Photons, &op, &SimConfig::default()).unwrap(), 0.0);
    }
}
