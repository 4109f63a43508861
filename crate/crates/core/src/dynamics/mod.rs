//! Mean-field time evolution of the atoms and the cavity field, and the
//! spectral read-out of the lasing frequency.
//!
//! Integration runs in the frame of the bare green line (δ_green = 0), so the
//! field oscillates at its absolute offset from the line and the frequency
//! shift is read directly against Δ_cavity.

pub mod spectrum;

use nalgebra::Matrix3;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bloch::{DensityMatrix, MeanField, StateResiduals};
use crate::error::NumericalError;
use crate::model::{angular, derived_params, OperatingPoint};
use crate::pump::pump_rate;

/// How the green pump enters the dynamics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpMode {
    /// Rate-equation pump with w from [`pump_rate`].
    #[default]
    Incoherent,
    /// Coherent drive at Δ_pump. Exploratory; results are flagged experimental.
    Coherent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Integration step, µs.
    pub dt: f64,
    /// Discarded lead-in, µs.
    pub t_transient: f64,
    /// Analysis window, µs.
    pub t_window: f64,
    /// Steps between stored field samples (reduced automatically if the
    /// sampling rate would be too low for the detunings in play).
    pub sample_stride: usize,
    /// Initial |a|, √photons.
    pub seed_amp: f64,
    pub rng_seed: u64,
    pub pump_mode: PumpMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_transient: 200.0,
            t_window: 256.0,
            sample_stride: 10,
            seed_amp: 1e-3,
            rng_seed: 0,
            pump_mode: PumpMode::Incoherent,
        }
    }
}

/// Steps between step-doubling checks, renormalization and residual samples.
pub const RENORM_EVERY: usize = 1000;
/// Length of the step-doubling control run, µs.
pub const CONTROL_SPAN_US: f64 = 10.0;
pub const CONTROL_TOL: f64 = 1e-6;
pub const MAX_DT_HALVINGS: u32 = 4;
pub const RESIDUAL_TOL: f64 = 1e-6;

impl SimConfig {
    pub fn validate(&self) -> Result<(), NumericalError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(NumericalError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_window >= 64.0) {
            return Err(NumericalError::Config(format!(
                "t_window must be at least 64 µs, got {}",
                self.t_window
            )));
        }
        if !(self.t_transient >= 0.0) {
            return Err(NumericalError::Config(format!(
                "t_transient must be non-negative, got {}",
                self.t_transient
            )));
        }
        if self.sample_stride == 0 {
            return Err(NumericalError::Config("sample_stride must be at least 1".into()));
        }
        if !(self.seed_amp > 0.0 && self.seed_amp.is_finite()) {
            return Err(NumericalError::Config(format!(
                "seed_amp must be positive, got {}",
                self.seed_amp
            )));
        }
        Ok(())
    }

    /// Largest stride not above `sample_stride` whose Nyquist frequency
    /// 1/(2·dt·stride) exceeds 4·`max_detuning`.
    pub fn effective_stride(&self, max_detuning: f64) -> Result<usize, NumericalError> {
        let need = 4.0 * max_detuning;
        let mut s = self.sample_stride;
        while s >= 1 {
            if 1.0 / (2.0 * self.dt * s as f64) > need {
                return Ok(s);
            }
            s -= 1;
        }
        Err(NumericalError::Config(format!(
            "dt = {} µs cannot resolve detunings up to {max_detuning} MHz",
            self.dt
        )))
    }
}

/// Uniformly sampled field record plus state diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Sample times, µs.
    pub times: Vec<f64>,
    /// Cavity field in the bare-line frame, √photons.
    pub field: Vec<C64>,
    /// (time, residuals before renormalization) every [`RENORM_EVERY`] steps.
    pub state_checks: Vec<(f64, StateResiduals)>,
    /// Step size actually used after the step-doubling control, µs.
    pub dt_used: f64,
    /// Spacing of `times`, µs.
    pub sample_spacing: f64,
    pub final_state: DensityMatrix,
    pub experimental: bool,
}

impl Trajectory {
    pub fn worst_residuals(&self) -> StateResiduals {
        self.state_checks
            .iter()
            .fold(StateResiduals::default(), |acc, (_, r)| acc.worst(*r))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LasingReport {
    /// ⟨|a|²⟩ over the analysis window.
    pub mean_photons: f64,
    /// Oscillation frequency relative to the bare green line, MHz.
    pub f_peak: f64,
    /// f_peak − Δ_cavity, MHz.
    pub shift: f64,
    pub lasing: bool,
    /// Output through one mirror, W.
    pub output_watts: f64,
    pub experimental: bool,
}

#[derive(Clone, Copy)]
struct State {
    rho: Matrix3<C64>,
    a: C64,
}

struct Stepper {
    mf: MeanField,
    /// Coherent pump: coupling amplitude (rad/µs) and angular detuning.
    drive: Option<(f64, f64)>,
}

impl Stepper {
    #[inline]
    fn f(&self, t: f64, s: &State) -> State {
        let extra = match self.drive {
            Some((amp, det)) => C64::from_polar(amp, -det * t),
            None => C64::new(0.0, 0.0),
        };
        let (rho, a) = self.mf.eval(&s.rho, s.a, extra);
        State { rho, a }
    }

    #[inline]
    fn step(&self, t: f64, s: &State, h: f64) -> State {
        let half = 0.5 * h;
        let k1 = self.f(t, s);
        let s2 = State {
            rho: s.rho + k1.rho * C64::new(half, 0.0),
            a: s.a + k1.a * half,
        };
        let k2 = self.f(t + half, &s2);
        let s3 = State {
            rho: s.rho + k2.rho * C64::new(half, 0.0),
            a: s.a + k2.a * half,
        };
        let k3 = self.f(t + half, &s3);
        let s4 = State {
            rho: s.rho + k3.rho * C64::new(h, 0.0),
            a: s.a + k3.a * h,
        };
        let k4 = self.f(t + h, &s4);
        let sixth = h / 6.0;
        State {
            rho: s.rho + (k1.rho + (k2.rho + k3.rho) * C64::new(2.0, 0.0) + k4.rho) * C64::new(sixth, 0.0),
            a: s.a + (k1.a + 2.0 * (k2.a + k3.a) + k4.a) * sixth,
        }
    }

    /// Largest per-entry disagreement between one step of `h` and two steps of
    /// `h/2`, over `span` µs. Entries are compared relative to max(1, |x|).
    fn doubling_mismatch(&self, init: State, h: f64, span: f64) -> f64 {
        let steps = (span / h).round() as usize;
        let mut s = init;
        let mut worst: f64 = 0.0;
        for k in 0..steps {
            let t = k as f64 * h;
            let full = self.step(t, &s, h);
            let mid = self.step(t, &s, 0.5 * h);
            let two = self.step(t + 0.5 * h, &mid, 0.5 * h);
            let da = (full.a - two.a).norm() / two.a.norm().max(1.0);
            let dr = full
                .rho
                .iter()
                .zip(two.rho.iter())
                .map(|(x, y)| (x - y).norm() / y.norm().max(1.0))
                .fold(0.0, f64::max);
            worst = worst.max(da).max(dr);
            if !worst.is_finite() {
                return f64::INFINITY;
            }
            s = two;
        }
        worst
    }
}

fn initial_field(cfg: &SimConfig) -> C64 {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    C64::from_polar(cfg.seed_amp, phase)
}

/// Integrate the mean-field equations from the ground state and a seeded field.
pub fn integrate(op: &OperatingPoint, cfg: &SimConfig) -> Result<Trajectory, NumericalError> {
    integrate_from(op, cfg, initial_field(cfg))
}

/// As [`integrate`] with an explicit initial field amplitude.
pub fn integrate_from(op: &OperatingPoint, cfg: &SimConfig, a0: C64) -> Result<Trajectory, NumericalError> {
    op.validate()?;
    cfg.validate()?;
    let stride0 = cfg.effective_stride(op.max_abs_detuning())?;
    let (w, drive, experimental) = match cfg.pump_mode {
        PumpMode::Incoherent => (pump_rate(op)?, None, false),
        PumpMode::Coherent => (
            0.0,
            Some((0.5 * angular(op.omega_pump), angular(op.delta_pump))),
            true,
        ),
    };
    let stepper = Stepper {
        mf: MeanField::new(op, w, 0.0),
        drive,
    };
    let init = State {
        rho: DensityMatrix::ground().0,
        a: a0,
    };

    let total = cfg.t_transient + cfg.t_window;
    let span = CONTROL_SPAN_US.min(total);
    let mut dt = cfg.dt;
    let mut halvings = 0;
    loop {
        let mismatch = stepper.doubling_mismatch(init, dt, span);
        if mismatch <= CONTROL_TOL {
            break;
        }
        if halvings == MAX_DT_HALVINGS {
            return Err(NumericalError::Stiff {
                halvings,
                dt_us: dt,
                mismatch,
            });
        }
        dt *= 0.5;
        halvings += 1;
    }
    let stride = stride0 << halvings;
    let sample_spacing = dt * stride as f64;

    let steps = (total / dt).ceil() as usize;
    let n_samples = steps / stride + 1;
    let mut times = Vec::with_capacity(n_samples);
    let mut field = Vec::with_capacity(n_samples);
    let mut state_checks = Vec::with_capacity(steps / RENORM_EVERY + 1);
    let mut s = init;
    for k in 0..=steps {
        let t = k as f64 * dt;
        if k % stride == 0 {
            times.push(t);
            field.push(s.a);
        }
        if k == steps {
            break;
        }
        if k > 0 && k % RENORM_EVERY == 0 {
            let mut rho = DensityMatrix(s.rho);
            let r = rho.residuals();
            if !(r.max() <= RESIDUAL_TOL) || !s.a.is_finite() {
                return Err(NumericalError::IntegrationDiverged {
                    t_us: t,
                    residual: r.max(),
                });
            }
            state_checks.push((t, r));
            rho.renormalize();
            s.rho = rho.0;
        }
        s = stepper.step(t, &s, dt);
    }
    let final_state = DensityMatrix(s.rho);
    let r = final_state.residuals();
    if !(r.max() <= RESIDUAL_TOL) || !s.a.is_finite() {
        return Err(NumericalError::IntegrationDiverged {
            t_us: steps as f64 * dt,
            residual: r.max(),
        });
    }
    state_checks.push((steps as f64 * dt, r));

    Ok(Trajectory {
        times,
        field,
        state_checks,
        dt_used: dt,
        sample_spacing,
        final_state,
        experimental,
    })
}

/// Lasing read-out from the analysis window of `traj`.
///
/// Returns [`NumericalError::BelowThreshold`] if the field holds one photon or
/// fewer on average, or if no spectral bin rises 10× above the median floor.
pub fn analyze(traj: &Trajectory, op: &OperatingPoint, cfg: &SimConfig) -> Result<LasingReport, NumericalError> {
    let start = traj
        .times
        .iter()
        .position(|&t| t >= cfg.t_transient - 1e-9)
        .unwrap_or(traj.times.len());
    let len = ((cfg.t_window / traj.sample_spacing).round() as usize).min(traj.times.len() - start);
    let window = &traj.field[start..start + len];
    if window.len() < 3 {
        return Err(NumericalError::Config("trajectory does not cover the analysis window".into()));
    }
    let mean_photons = window.iter().map(|z| z.norm_sqr()).sum::<f64>() / window.len() as f64;
    let tone = spectrum::dominant_tone(window, traj.sample_spacing);
    let contrast = tone.map_or(0.0, |t| t.contrast);
    if !(mean_photons > 1.0) || !(contrast >= 10.0) {
        return Err(NumericalError::BelowThreshold { mean_photons, contrast });
    }
    let tone = tone.expect("contrast implies a tone");
    let d = derived_params(&op.cavity, &op.atom);
    Ok(LasingReport {
        mean_photons,
        f_peak: tone.freq,
        shift: tone.freq - op.delta_cavity,
        lasing: true,
        output_watts: mean_photons * d.watts_per_photon,
        experimental: traj.experimental,
    })
}

/// Integrate and analyze in one call.
pub fn simulate(op: &OperatingPoint, cfg: &SimConfig) -> Result<LasingReport, NumericalError> {
    let traj = integrate(op, cfg)?;
    analyze(&traj, op, cfg)
}
