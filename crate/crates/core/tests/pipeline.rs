//! End-to-end paths through the public API: config → map → regions,
//! contours, exports.

use yblaser_core::dynamics::{simulate, SimConfig};
use yblaser_core::io::{export_map, import_map_csv, parse_config, render_heatmap, HeatmapStyle};
use yblaser_core::model::dressed_states;
use yblaser_core::sweep::{extract_contour, lasing_regions, run_map, RunOptions, Task};
use yblaser_core::threshold::is_lasing;
use yblaser_core::OperatingPoint;

fn coarse_threshold_map() -> yblaser_core::sweep::Map2D {
    let cfg = parse_config("nx = 25\nny = 21\nx_min_mhz = -6\nx_max_mhz = 14\ny_min_mhz = -45\ny_max_mhz = -15\n").unwrap();
    run_map(&cfg.grid(Task::Threshold).unwrap(), &cfg.sim, RunOptions { workers: 2, checkpoint: None }).unwrap()
}

#[test]
fn threshold_map_has_one_region_near_the_dressed_shift() {
    let map = coarse_threshold_map();
    let regions = lasing_regions(&map);
    assert!(!regions.is_empty());
    let top = &regions[0];
    let lasing: usize = regions.iter().map(|r| r.len()).sum();
    assert!(top.len() as f64 >= 0.9 * lasing as f64);
    let shift = -dressed_states(-30.0, 19.0).lambda_minus;
    assert!((top.centroid_x - shift).abs() < 1.5, "{}", top.centroid_x);
    assert!((top.centroid_y + 30.0).abs() < 3.0, "{}", top.centroid_y);
}

#[test]
fn contour_points_separate_lasing_from_dark_samples() {
    let map = coarse_threshold_map();
    let lines = extract_contour(&map);
    assert!(!lines.is_empty());
    let index = |axis: &[f64], v: f64| axis.iter().position(|a| (a - v).abs() < 1e-9);
    for line in &lines {
        for &(x, y) in &line.points {
            // Each point is the midpoint of one grid edge.
            let (a, b) = match (index(&map.x, x), index(&map.y, y)) {
                (Some(i), None) => {
                    let j = map.y.iter().position(|v| *v > y).unwrap();
                    ((i, j - 1), (i, j))
                }
                (None, Some(j)) => {
                    let i = map.x.iter().position(|v| *v > x).unwrap();
                    ((i - 1, j), (i, j))
                }
                _ => panic!("({x}, {y}) is not an edge midpoint"),
            };
            assert_ne!(map.is_set(a.0, a.1), map.is_set(b.0, b.1), "({x}, {y})");
        }
    }
}

#[test]
fn exported_map_reimports_exactly() {
    let map = coarse_threshold_map();
    let dir = tempfile::tempdir().unwrap();
    let (csv, meta) = export_map(&map, &dir.path().join("threshold")).unwrap();
    let back = import_map_csv(&std::fs::read_to_string(csv).unwrap()).unwrap();
    assert_eq!(back.x, map.x);
    assert_eq!(back.y, map.y);
    assert_eq!(back.values, map.values);
    assert!(std::fs::read_to_string(meta).unwrap().contains("\"record\":\"provenance\""));
    let svg = render_heatmap(&map, &HeatmapStyle::default(), Some(&extract_contour(&map)), "threshold");
    assert_eq!(svg.matches("<rect x").count(), map.values.len() + 1);
}

#[test]
fn lasing_point_redshifts() {
    let op = OperatingPoint {
        delta_pump: 2.4,
        ..OperatingPoint::default()
    };
    assert!(is_lasing(&op).unwrap().lasing);
    let r = simulate(&op, &SimConfig::default()).unwrap();
    assert!(r.lasing && r.mean_photons > 1e4);
    assert!(r.shift < 0.0 && r.shift > -2.0, "{}", r.shift);
    assert!(r.output_watts > 0.0);
}

#[test]
fn interrupted_map_resumes_to_the_same_values() {
    let cfg = parse_config("nx = 9\nny = 7\n").unwrap();
    let grid = cfg.grid(Task::Gain).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("run.ck");
    let full = run_map(&grid, &cfg.sim, RunOptions { workers: 1, checkpoint: None }).unwrap();

    let _ = run_map(&grid, &cfg.sim, RunOptions { workers: 1, checkpoint: Some(&ck) }).unwrap();
    let text = std::fs::read_to_string(&ck).unwrap();
    let cut: String = text.lines().take(20).map(|l| format!("{l}\n")).collect::<String>() + "3,4,0.12";
    std::fs::write(&ck, cut).unwrap();

    let resumed = run_map(&grid, &cfg.sim, RunOptions { workers: 3, checkpoint: Some(&ck) }).unwrap();
    assert_eq!(resumed.metadata.resumed_cells, 19);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&resumed.values), bits(&full.values));
    assert_eq!(std::fs::read_to_string(&ck).unwrap().lines().count(), 1 + 63);
}
