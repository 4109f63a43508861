//! `yblaser`: command-line front end for threshold and frequency maps.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use yblaser_core::bloch::{build_generator, steady_state, FrameSpec, B, E, G};
use yblaser_core::io::{export_map, export_table, map_csv, parse_config, render_heatmap, HeatmapStyle, RunConfig};
use yblaser_core::model::{derived_params, technical};
use yblaser_core::pump::{pump_rate, pump_rate_at};
use yblaser_core::sweep::{extract_contour, run_map, RunOptions, SweepError, Task};
use yblaser_core::threshold::{saturated_photon_number, small_signal_gain, threshold_pump_power};
use yblaser_core::NumericalError;

#[derive(Parser)]
#[command(name = "yblaser", version, about = "Cold-atom cavity laser threshold and frequency maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output base path; files get .csv, .meta.jsonl and .svg suffixes.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for maps (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Checkpoint file for maps; finished cells found there are skipped.
    #[arg(long, global = true)]
    resume: Option<PathBuf>,
    /// Also write an SVG heatmap next to the map CSV.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print constants derived from the atom and cavity parameters.
    Params,
    /// Scan the pump rate over the configured Δ_pump axis.
    PumpRate,
    /// Atomic steady state at the operating point, empty cavity.
    Steady,
    /// Small-signal gain at the operating point.
    Gain,
    /// Lasing map over (Δ_pump, Δ_cavity); the config `task` selects the value.
    ThresholdMap,
    /// Lasing frequency shift map over (Δ_pump, Δ_cavity).
    FreqMap,
    /// Output power versus pump power from the gain-clamped photon number.
    PowerCurve,
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<NumericalError> for Failure {
    fn from(e: NumericalError) -> Self {
        match e {
            NumericalError::Model(m) => Failure::Config(m.to_string()),
            NumericalError::Config(m) => Failure::Config(m),
            e => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<yblaser_core::ModelError> for Failure {
    fn from(e: yblaser_core::ModelError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Io { .. } | SweepError::Pool(_) => Failure::Io(e.to_string()),
            e => Failure::Config(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical error: {m}");
            ExitCode::from(3)
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out = Some(out.display().to_string());
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if cli.svg && cfg.out.is_none() {
        return Err(Failure::Config("--svg needs an output base (--out or `out` key)".into()));
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli)?;
    let out = cfg.out.as_ref().map(PathBuf::from);
    match cli.command {
        Command::Params => params(&cfg),
        Command::PumpRate => pump_scan(&cfg, out.as_deref()),
        Command::Steady => steady(&cfg),
        Command::Gain => gain(&cfg),
        Command::ThresholdMap => map(cli, &cfg, cfg.task, out.as_deref()),
        Command::FreqMap => map(cli, &cfg, Task::Frequency, out.as_deref()),
        Command::PowerCurve => power_curve(&cfg, out.as_deref()),
    }
}

fn params(cfg: &RunConfig) -> Result<(), Failure> {
    let op = cfg.operating_point()?;
    let d = derived_params(&op.cavity, &op.atom);
    println!("c1 = {:.6}", d.c1);
    println!("omega_cavity_mhz = {:.6}", d.omega_cavity_collective);
    println!("round_trip_s = {:.6e}", d.round_trip_s);
    println!("watts_per_photon = {:.6e}", d.watts_per_photon);
    println!("omega_mot_mhz = {:.6}", op.omega_mot);
    println!("omega_pump_mhz = {:.6}", op.omega_pump);
    Ok(())
}

fn pump_scan(cfg: &RunConfig, out: Option<&Path>) -> Result<(), Failure> {
    let op = cfg.operating_point()?;
    let grid = cfg.grid(Task::Gain)?;
    let mut rows = Vec::new();
    for dp in grid.x_axis() {
        rows.push(vec![dp, pump_rate_at(&op, dp)?]);
    }
    let header = ["delta_pump_mhz", "w_per_us"];
    emit_table(out, &header, &rows, &[json!({ "record": "operating_point", "op": op })])
}

fn steady(cfg: &RunConfig) -> Result<(), Failure> {
    let op = cfg.operating_point()?;
    let w = pump_rate(&op)?;
    let rho = steady_state(&build_generator(&op, &FrameSpec::bare(Default::default()), w))?;
    println!("w_per_us = {w:.6e}");
    for (name, k) in [("g", G), ("b", B), ("e", E)] {
        println!("rho_{name}{name} = {:.6e}", rho.population(k));
    }
    let gb = rho.get(G, B);
    println!("rho_gb = {:.6e} {:+.6e}i", gb.re, gb.im);
    println!("max_residual = {:.3e}", rho.residuals().max());
    Ok(())
}

fn gain(cfg: &RunConfig) -> Result<(), Failure> {
    let op = cfg.operating_point()?;
    let g = small_signal_gain(&op)?;
    println!("gain_mhz = {:.6}", technical(g.gain));
    println!("kappa_mhz = {:.6}", technical(g.kappa));
    println!("margin_mhz = {:.6}", technical(g.margin));
    println!("test_amp = {:e}", g.test_amp);
    println!("converged = {}", g.converged);
    println!("lasing = {}", g.margin > 0.0);
    Ok(())
}

fn map(cli: &Cli, cfg: &RunConfig, task: Task, out: Option<&Path>) -> Result<(), Failure> {
    let grid = cfg.grid(task)?;
    let result = run_map(
        &grid,
        &cfg.sim,
        RunOptions {
            workers: cfg.workers,
            checkpoint: cli.resume.as_deref(),
        },
    )?;
    for e in &result.metadata.errors {
        eprintln!("cell ({}, {}) failed: {}", e.ix, e.iy, e.message);
    }
    let Some(base) = out else {
        print!("{}", map_csv(&result));
        return failed_cells(&result);
    };
    let (csv, meta) = export_map(&result, base).map_err(io_err(base))?;
    eprintln!("wrote {} and {}", csv.display(), meta.display());
    if cli.svg {
        let contours = (task == Task::Threshold).then(|| extract_contour(&result));
        let title = format!("{} map", task.name());
        let svg = render_heatmap(&result, &HeatmapStyle::default(), contours.as_deref(), &title);
        let mut path = base.as_os_str().to_os_string();
        path.push(".svg");
        let path = PathBuf::from(path);
        std::fs::write(&path, svg).map_err(io_err(&path))?;
        eprintln!("wrote {}", path.display());
    }
    failed_cells(&result)
}

/// Outputs are written even when cells fail; the run still reports failure.
fn failed_cells(map: &yblaser_core::sweep::Map2D) -> Result<(), Failure> {
    match map.metadata.errors.len() {
        0 => Ok(()),
        n => Err(Failure::Numerical(format!("{n} of {} cells failed", map.values.len()))),
    }
}

fn power_curve(cfg: &RunConfig, out: Option<&Path>) -> Result<(), Failure> {
    let base = cfg.operating_point()?;
    let d = derived_params(&base.cavity, &base.atom);
    let mut rows = Vec::new();
    for p in cfg.pump_powers() {
        let op = yblaser_core::OperatingPoint {
            omega_pump: cfg.calibration.pump_rabi(p)?,
            ..base
        };
        let n = saturated_photon_number(&op)?;
        rows.push(vec![p, op.omega_pump, n, n * d.watts_per_photon * 1e9]);
    }
    let threshold = match threshold_pump_power(&base, &cfg.calibration, (cfg.p_pump_min, cfg.p_pump_max)) {
        Ok(p) => Some(p),
        Err(NumericalError::NoThreshold { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    match threshold {
        Some(p) => eprintln!("threshold_pump_mw = {p:.4}"),
        None => eprintln!("no threshold in [{}, {}] mW", cfg.p_pump_min, cfg.p_pump_max),
    }
    let header = ["p_pump_mw", "omega_pump_mhz", "photons", "output_nw"];
    let meta = [
        json!({ "record": "operating_point", "op": base, "calibration": cfg.calibration }),
        json!({ "record": "threshold", "p_pump_mw": threshold }),
        json!({ "record": "provenance", "code_version": env!("CARGO_PKG_VERSION") }),
    ];
    emit_table(out, &header, &rows, &meta)
}

fn emit_table(out: Option<&Path>, header: &[&str], rows: &[Vec<f64>], meta: &[serde_json::Value]) -> Result<(), Failure> {
    match out {
        Some(base) => {
            let (csv, _) = export_table(base, header, rows, meta).map_err(io_err(base))?;
            eprintln!("wrote {}", csv.display());
        }
        None => {
            let mut s = header.join(",");
            s.push('\n');
            for r in rows {
                let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(s, "{}", cells.join(","));
            }
            print!("{s}");
        }
    }
    Ok(())
}
