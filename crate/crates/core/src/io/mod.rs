//! Configuration files and output artifacts.

pub mod config;
pub mod export;
pub mod svg;

pub use config::{parse_config, ConfigError, Drive, RunConfig};
pub use export::{export_map, export_table, import_map_csv, map_csv};
pub use svg::{render_heatmap, HeatmapStyle, PlotTransform};
