//! Line-based `key = value` run configuration.
//!
//! Frequencies are technical MHz, powers mW, times µs. `#` starts a comment.
//! Each drive takes either a Rabi frequency or a power, not both; a power is
//! converted with the calibration constant. Missing keys keep their defaults.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::dynamics::{PumpMode, SimConfig};
use crate::error::ModelError;
use crate::model::{AtomSpec, CavitySpec, OperatingPoint, PowerCalibration};
use crate::sweep::{GridSpec, Task};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, when the problem is tied to one.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn at(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: Some(line),
        message: message.into(),
    }
}

/// A drive given either by Rabi frequency (MHz) or by beam power (mW).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Drive {
    Rabi(f64),
    Power(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub atom: AtomSpec,
    pub cavity: CavitySpec,
    pub delta_mot: f64,
    pub delta_pump: f64,
    pub delta_cavity: f64,
    pub mot: Drive,
    pub pump: Drive,
    pub calibration: PowerCalibration,
    pub sim: SimConfig,
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
    pub task: Task,
    /// Pump power range for `power-curve`, mW.
    pub p_pump_min: f64,
    pub p_pump_max: f64,
    pub n_power: usize,
    pub workers: usize,
    pub out: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let op = OperatingPoint::default();
        Self {
            atom: op.atom,
            cavity: op.cavity,
            delta_mot: op.delta_mot,
            delta_pump: op.delta_pump,
            delta_cavity: op.delta_cavity,
            mot: Drive::Rabi(op.omega_mot),
            pump: Drive::Rabi(op.omega_pump),
            calibration: PowerCalibration::default(),
            sim: SimConfig::default(),
            x_min: -4.0,
            x_max: 8.0,
            nx: 60,
            y_min: -40.0,
            y_max: -20.0,
            ny: 60,
            task: Task::Threshold,
            p_pump_min: 0.0,
            p_pump_max: 6.0,
            n_power: 25,
            workers: 0,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn omega_mot(&self) -> Result<f64, ModelError> {
        match self.mot {
            Drive::Rabi(o) => Ok(o),
            Drive::Power(p) => self.calibration.mot_rabi(p),
        }
    }

    pub fn omega_pump(&self) -> Result<f64, ModelError> {
        match self.pump {
            Drive::Rabi(o) => Ok(o),
            Drive::Power(p) => self.calibration.pump_rabi(p),
        }
    }

    pub fn operating_point(&self) -> Result<OperatingPoint, ModelError> {
        let op = OperatingPoint {
            delta_mot: self.delta_mot,
            delta_pump: self.delta_pump,
            delta_cavity: self.delta_cavity,
            omega_mot: self.omega_mot()?,
            omega_pump: self.omega_pump()?,
            atom: self.atom,
            cavity: self.cavity,
        };
        op.validate()?;
        Ok(op)
    }

    pub fn grid(&self, task: Task) -> Result<GridSpec, ModelError> {
        Ok(GridSpec {
            x_min: self.x_min,
            x_max: self.x_max,
            nx: self.nx,
            y_min: self.y_min,
            y_max: self.y_max,
            ny: self.ny,
            base: self.operating_point()?,
            task,
        })
    }

    /// Pump powers for `power-curve`, endpoints included.
    pub fn pump_powers(&self) -> Vec<f64> {
        let n = self.n_power.max(2);
        (0..n)
            .map(|i| self.p_pump_min + (self.p_pump_max - self.p_pump_min) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let plain = |e: String| ConfigError { line: None, message: e };
        self.operating_point().map_err(|e| plain(e.to_string()))?;
        self.calibration.validate().map_err(|e| plain(e.to_string()))?;
        self.sim.validate().map_err(|e| plain(e.to_string()))?;
        self.grid(self.task)
            .map_err(|e| plain(e.to_string()))?
            .validate()
            .map_err(|e| plain(e.to_string()))?;
        if !(self.p_pump_min >= 0.0 && self.p_pump_min < self.p_pump_max) || self.n_power < 2 {
            return Err(plain("power curve needs 0 ≤ p_pump_min_mw < p_pump_max_mw and n_power ≥ 2".into()));
        }
        Ok(())
    }

    /// The configuration as a document that [`parse_config`] reads back
    /// to an equal value.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("gamma_b_mhz", self.atom.gamma_b.to_string());
        kv("gamma_g_mhz", self.atom.gamma_g.to_string());
        kv("lambda_b_nm", self.atom.lambda_b.to_string());
        kv("lambda_g_nm", self.atom.lambda_g.to_string());
        kv("kappa_mhz", self.cavity.kappa.to_string());
        kv("g0_mhz", self.cavity.g0.to_string());
        kv("cavity_length_m", self.cavity.length_m.to_string());
        kv("mirror_transmission", self.cavity.t_mirror.to_string());
        kv("n_atoms", self.cavity.n_atoms.to_string());
        kv("delta_mot_mhz", self.delta_mot.to_string());
        kv("delta_pump_mhz", self.delta_pump.to_string());
        kv("delta_cavity_mhz", self.delta_cavity.to_string());
        match self.mot {
            Drive::Rabi(v) => kv("omega_mot_mhz", v.to_string()),
            Drive::Power(v) => kv("p_mot_mw", v.to_string()),
        }
        match self.pump {
            Drive::Rabi(v) => kv("omega_pump_mhz", v.to_string()),
            Drive::Power(v) => kv("p_pump_mw", v.to_string()),
        }
        kv("k_pump", self.calibration.k_pump.to_string());
        kv("k_mot", self.calibration.k_mot.to_string());
        kv("dt_us", self.sim.dt.to_string());
        kv("t_transient_us", self.sim.t_transient.to_string());
        kv("t_window_us", self.sim.t_window.to_string());
        kv("sample_stride", self.sim.sample_stride.to_string());
        kv("seed_amp", self.sim.seed_amp.to_string());
        kv("rng_seed", self.sim.rng_seed.to_string());
        kv(
            "pump_mode",
            match self.sim.pump_mode {
                PumpMode::Incoherent => "incoherent",
                PumpMode::Coherent => "coherent",
            }
            .into(),
        );
        kv("x_min_mhz", self.x_min.to_string());
        kv("x_max_mhz", self.x_max.to_string());
        kv("nx", self.nx.to_string());
        kv("y_min_mhz", self.y_min.to_string());
        kv("y_max_mhz", self.y_max.to_string());
        kv("ny", self.ny.to_string());
        kv("task", self.task.name().into());
        kv("p_pump_min_mw", self.p_pump_min.to_string());
        kv("p_pump_max_mw", self.p_pump_max.to_string());
        kv("n_power", self.n_power.to_string());
        kv("workers", self.workers.to_string());
        if let Some(out) = &self.out {
            kv("out", out.clone());
        }
        s
    }
}

fn num(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(at(line, format!("{key}: malformed number {v:?}"))),
    }
}

fn count<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| at(line, format!("{key}: expected a non-negative integer, got {v:?}")))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut c = RunConfig::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut mot_key: Option<(&str, usize)> = None;
    let mut pump_key: Option<(&str, usize)> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| at(line, format!("expected `key = value`, got {content:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(first) = seen.insert(key.to_string(), line) {
            return Err(at(line, format!("duplicate key {key} (first set on line {first})")));
        }
        let f = || num(line, key, value);
        match key {
            "gamma_b_mhz" => c.atom.gamma_b = f()?,
            "gamma_g_mhz" => c.atom.gamma_g = f()?,
            "lambda_b_nm" => c.atom.lambda_b = f()?,
            "lambda_g_nm" => c.atom.lambda_g = f()?,
            "kappa_mhz" => c.cavity.kappa = f()?,
            "g0_mhz" => c.cavity.g0 = f()?,
            "cavity_length_m" => c.cavity.length_m = f()?,
            "mirror_transmission" => c.cavity.t_mirror = f()?,
            "n_atoms" => c.cavity.n_atoms = f()?,
            "delta_mot_mhz" => c.delta_mot = f()?,
            "delta_pump_mhz" => c.delta_pump = f()?,
            "delta_cavity_mhz" => c.delta_cavity = f()?,
            "omega_mot_mhz" | "p_mot_mw" => {
                if let Some((other, l)) = mot_key {
                    return Err(at(line, format!("{key} conflicts with {other} on line {l}: give one per drive")));
                }
                mot_key = Some((if key == "p_mot_mw" { "p_mot_mw" } else { "omega_mot_mhz" }, line));
                c.mot = if key == "p_mot_mw" { Drive::Power(f()?) } else { Drive::Rabi(f()?) };
            }
            "omega_pump_mhz" | "p_pump_mw" => {
                if let Some((other, l)) = pump_key {
                    return Err(at(line, format!("{key} conflicts with {other} on line {l}: give one per drive")));
                }
                pump_key = Some((if key == "p_pump_mw" { "p_pump_mw" } else { "omega_pump_mhz" }, line));
                c.pump = if key == "p_pump_mw" { Drive::Power(f()?) } else { Drive::Rabi(f()?) };
            }
            "k_pump" => c.calibration.k_pump = f()?,
            "k_mot" => c.calibration.k_mot = f()?,
            "dt_us" => c.sim.dt = f()?,
            "t_transient_us" => c.sim.t_transient = f()?,
            "t_window_us" => c.sim.t_window = f()?,
            "sample_stride" => c.sim.sample_stride = count(line, key, value)?,
            "seed_amp" => c.sim.seed_amp = f()?,
            "rng_seed" => c.sim.rng_seed = count(line, key, value)?,
            "pump_mode" => {
                c.sim.pump_mode = match value {
                    "incoherent" => PumpMode::Incoherent,
                    "coherent" => PumpMode::Coherent,
                    _ => return Err(at(line, format!("pump_mode: expected incoherent or coherent, got {value:?}"))),
                }
            }
            "x_min_mhz" => c.x_min = f()?,
            "x_max_mhz" => c.x_max = f()?,
            "nx" => c.nx = count(line, key, value)?,
            "y_min_mhz" => c.y_min = f()?,
            "y_max_mhz" => c.y_max = f()?,
            "ny" => c.ny = count(line, key, value)?,
            "task" => {
                c.task = Task::parse(value)
                    .ok_or_else(|| at(line, format!("task: expected threshold, gain, frequency or photons, got {value:?}")))?
            }
            "p_pump_min_mw" => c.p_pump_min = f()?,
            "p_pump_max_mw" => c.p_pump_max = f()?,
            "n_power" => c.n_power = count(line, key, value)?,
            "workers" => c.workers = count(line, key, value)?,
            "out" => {
                if value.is_empty() {
                    return Err(at(line, "out: empty path"));
                }
                c.out = Some(value.to_string());
            }
            _ => return Err(at(line, format!("unknown key {key}"))),
        }
    }
    c.validate()?;
    Ok(c)
}
