//! CSV and JSON-lines output.
//!
//! Map CSV: the first row is an empty cell followed by the x-axis (Δ_pump)
//! values; every further row is a Δ_cavity value followed by that row of the
//! map. NaN is written as an empty field. Numbers use Rust's shortest
//! round-trip formatting, so finite values re-import bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::model::derived_params;
use crate::sweep::Map2D;

fn field(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

pub fn map_csv(map: &Map2D) -> String {
    let mut s = String::new();
    for x in &map.x {
        let _ = write!(s, ",{}", field(*x));
    }
    s.push('\n');
    for (iy, y) in map.y.iter().enumerate() {
        s.push_str(&field(*y));
        for ix in 0..map.nx() {
            let _ = write!(s, ",{}", field(map.get(ix, iy)));
        }
        s.push('\n');
    }
    s
}

/// Axes and row-major values read back from [`map_csv`] output.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvMap {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn import_map_csv(text: &str) -> Result<CsvMap, String> {
    let parse = |line: usize, f: &str| -> Result<f64, String> {
        if f.is_empty() {
            Ok(f64::NAN)
        } else {
            f.parse().map_err(|_| format!("line {line}: malformed number {f:?}"))
        }
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or("empty file")?;
    let mut cols = header.split(',');
    if cols.next() != Some("") {
        return Err("line 1: first cell must be empty".into());
    }
    let x = cols.map(|f| parse(1, f)).collect::<Result<Vec<_>, _>>()?;
    let (mut y, mut values) = (Vec::new(), Vec::new());
    for (i, line) in lines {
        let mut cols = line.split(',');
        y.push(parse(i + 1, cols.next().unwrap_or(""))?);
        let row = cols.map(|f| parse(i + 1, f)).collect::<Result<Vec<_>, _>>()?;
        if row.len() != x.len() {
            return Err(format!("line {}: expected {} values, got {}", i + 1, x.len(), row.len()));
        }
        values.extend(row);
    }
    Ok(CsvMap { x, y, values })
}

/// Metadata records for a map: parameters, derived constants, provenance,
/// then one record per failed cell.
pub fn map_metadata(map: &Map2D) -> Vec<Value> {
    let m = &map.metadata;
    let base = &m.grid.base;
    let mut records = vec![
        json!({ "record": "grid", "task": m.grid.task, "grid": m.grid }),
        json!({ "record": "sim", "sim": m.sim }),
        json!({ "record": "derived", "derived": derived_params(&base.cavity, &base.atom) }),
        json!({
            "record": "provenance",
            "code_version": m.code_version,
            "grid_hash": m.grid_hash,
            "workers": m.workers,
            "elapsed_s": m.elapsed_s,
            "resumed_cells": m.resumed_cells,
            "failed_cells": m.errors.len(),
            "units": { "axes": "MHz", "gain": "MHz", "frequency": "MHz", "photons": "1" },
            "layout": "rows are delta_cavity (y), columns delta_pump (x)",
        }),
    ];
    records.extend(m.errors.iter().map(|e| json!({ "record": "cell_error", "ix": e.ix, "iy": e.iy, "message": e.message })));
    records
}

pub fn jsonl(records: &[Value]) -> String {
    records.iter().map(|r| format!("{r}\n")).collect()
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<base>.csv` and `<base>.meta.jsonl`.
pub fn export_map(map: &Map2D, base: &Path) -> io::Result<(PathBuf, PathBuf)> {
    let csv = with_suffix(base, ".csv");
    let meta = with_suffix(base, ".meta.jsonl");
    fs::write(&csv, map_csv(map))?;
    fs::write(&meta, jsonl(&map_metadata(map)))?;
    Ok((csv, meta))
}

/// Writes a column table as `<base>.csv` and its metadata as
/// `<base>.meta.jsonl`.
pub fn export_table(base: &Path, header: &[&str], rows: &[Vec<f64>], meta: &[Value]) -> io::Result<(PathBuf, PathBuf)> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.iter().map(|v| field(*v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    let csv = with_suffix(base, ".csv");
    let meta_path = with_suffix(base, ".meta.jsonl");
    fs::write(&csv, s)?;
    fs::write(&meta_path, jsonl(meta))?;
    Ok((csv, meta_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SimConfig;
    use crate::model::OperatingPoint;
    use crate::sweep::{CellError, GridSpec, MapMetadata, Task};
    use proptest::prelude::*;

    fn map(nx: usize, ny: usize, values: Vec<f64>) -> Map2D {
        let grid = GridSpec {
            x_min: -1.0,
            x_max: 1.0,
            nx,
            y_min: -31.0,
            y_max: -29.0,
            ny,
            base: OperatingPoint::default(),
            task: Task::Gain,
        };
        Map2D {
            x: grid.x_axis(),
            y: grid.y_axis(),
            values,
            metadata: MapMetadata {
                grid,
                sim: SimConfig::default(),
                code_version: "0".into(),
                grid_hash: "h".into(),
                workers: 1,
                elapsed_s: 0.0,
                resumed_cells: 0,
                errors: vec![CellError {
                    ix: 1,
                    iy: 0,
                    message: "boom".into(),
                }],
            },
        }
    }

    #[test]
    fn zeros_give_three_by_three() {
        let csv = map_csv(&map(2, 2, vec![0.0; 4]));
        assert_eq!(csv, ",-1,1\n-31,0,0\n-29,0,0\n");
    }

    #[test]
    fn nan_is_empty_field() {
        let csv = map_csv(&map(2, 2, vec![0.5, f64::NAN, 1.0, 2.0]));
        assert_eq!(csv.lines().nth(1), Some("-31,0.5,"));
        let back = import_map_csv(&csv).unwrap();
        assert!(back.values[1].is_nan());
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(import_map_csv(",1,2\n0,1\n").is_err());
        assert!(import_map_csv("x,1\n").is_err());
        assert!(import_map_csv(",1\n0,abc\n").is_err());
    }

    #[test]
    fn files_written() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("m");
        let (csv, meta) = export_map(&map(2, 2, vec![1.0; 4]), &base).unwrap();
        assert!(csv.ends_with("m.csv") && meta.ends_with("m.meta.jsonl"));
        let text = fs::read_to_string(meta).unwrap();
        let recs: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(recs.len(), 5);
        assert_eq!(recs[0]["grid"]["base"]["cavity"]["n_atoms"], 75000.0);
        assert_eq!(recs[4]["record"], "cell_error");
        assert!(export_map(&map(2, 2, vec![1.0; 4]), &dir.path().join("missing/m")).is_err());
    }

    proptest! {
        #[test]
        fn csv_roundtrip_is_bit_exact(vals in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 12)) {
            let m = map(4, 3, vals.clone());
            let back = import_map_csv(&map_csv(&m)).unwrap();
            prop_assert_eq!(back.x, m.x);
            prop_assert_eq!(back.y, m.y);
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back.values), bits(&vals));
        }
    }
}
