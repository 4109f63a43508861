//! Small-signal gain and everything derived from comparing it with the cavity
//! loss: the lasing predicate, threshold pump power and the gain-clamped
//! photon number.
//!
//! The gain is probed with a frozen real field at the empty-cavity frequency
//! (green frame δ_green = Δ_cavity). Rates are energy rates in rad/µs, so G is
//! compared directly with κ.

use num_complex::Complex64;
use serde::Serialize;

use crate::bloch::{build_generator, steady_state, FrameSpec, E, G};
use crate::error::NumericalError;
use crate::model::{angular, OperatingPoint, PowerCalibration};
use crate::pump::pump_rate;

/// Initial test-field amplitude, √photons.
pub const TEST_AMP_START: f64 = 1e-2;
pub const MAX_GAIN_HALVINGS: u32 = 10;
const GAIN_LINEARITY_TOL: f64 = 0.01;
/// Power bisection stops once the bracket is narrower than this, mW.
pub const POWER_TOL_MW: f64 = 0.05;
/// Relative bracket width at which the photon-number bisection stops.
pub const PHOTON_REL_TOL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GainResult {
    /// Field energy gain rate, rad/µs. Positive means amplification.
    pub gain: f64,
    /// Cavity energy loss rate, rad/µs.
    pub kappa: f64,
    pub margin: f64,
    pub test_amp: f64,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LasingDecision {
    pub lasing: bool,
    /// G − κ, rad/µs.
    pub margin: f64,
}

/// Gain rate (rad/µs) seen by a frozen real field of amplitude `amp` at the
/// empty-cavity frequency, given pump rate `w`.
pub fn gain_at(op: &OperatingPoint, w: f64, amp: f64) -> Result<f64, NumericalError> {
    let frame = FrameSpec {
        delta_green: op.delta_cavity,
        field_amp: Complex64::new(amp, 0.0),
    };
    let rho = steady_state(&build_generator(op, &frame, w))?;
    let g0 = angular(op.cavity.g0);
    let a = frame.field_amp;
    Ok(-2.0 * g0 * op.cavity.n_atoms * (rho.get(G, E) * a.conj()).im / a.norm_sqr())
}

/// Small-signal gain at `op`, computing the pump rate from the drive.
pub fn small_signal_gain(op: &OperatingPoint) -> Result<GainResult, NumericalError> {
    op.validate()?;
    let w = pump_rate(op)?;
    small_signal_gain_with_rate(op, w)
}

/// Small-signal gain for a known pump rate `w` (rad/µs). Halves the test field
/// until the gain changes by less than 1 %.
pub fn small_signal_gain_with_rate(op: &OperatingPoint, w: f64) -> Result<GainResult, NumericalError> {
    let kappa = angular(op.cavity.kappa);
    let mut amp = TEST_AMP_START;
    let mut sequence = vec![gain_at(op, w, amp)?];
    for _ in 0..MAX_GAIN_HALVINGS {
        amp *= 0.5;
        let g = gain_at(op, w, amp)?;
        let prev = sequence[sequence.len() - 1];
        sequence.push(g);
        if (g - prev).abs() < GAIN_LINEARITY_TOL * g.abs() || (g == 0.0 && prev == 0.0) {
            return Ok(GainResult {
                gain: g,
                kappa,
                margin: g - kappa,
                test_amp: amp,
                converged: true,
            });
        }
    }
    Err(NumericalError::GainNotConverged { sequence })
}

pub fn is_lasing(op: &OperatingPoint) -> Result<LasingDecision, NumericalError> {
    let r = small_signal_gain(op)?;
    Ok(LasingDecision {
        lasing: r.margin > 0.0,
        margin: r.margin,
    })
}

/// Pump power (mW) at which `op` starts lasing, by bisection inside
/// `bracket_mw`. `op.omega_pump` is ignored; the pump Rabi frequency follows
/// from `calib`.
pub fn threshold_pump_power(
    op: &OperatingPoint,
    calib: &PowerCalibration,
    bracket_mw: (f64, f64),
) -> Result<f64, NumericalError> {
    calib.validate()?;
    let (mut lo, mut hi) = bracket_mw;
    let lasing_at = |p: f64| -> Result<bool, NumericalError> {
        let probe = OperatingPoint {
            omega_pump: calib.pump_rabi(p)?,
            ..*op
        };
        Ok(is_lasing(&probe)?.lasing)
    };
    let no_threshold = NumericalError::NoThreshold { low_mw: lo, high_mw: hi };
    if !(lo < hi) || lasing_at(lo)? || !lasing_at(hi)? {
        return Err(no_threshold);
    }
    while hi - lo >= POWER_TOL_MW {
        let mid = 0.5 * (lo + hi);
        if lasing_at(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Intracavity photon number at which the saturated gain equals κ, using
/// frozen-field steady states at the empty-cavity frequency. Zero below
/// threshold.
pub fn saturated_photon_number(op: &OperatingPoint) -> Result<f64, NumericalError> {
    op.validate()?;
    let w = pump_rate(op)?;
    let small = small_signal_gain_with_rate(op, w)?;
    if small.margin <= 0.0 {
        return Ok(0.0);
    }
    let kappa = small.kappa;
    let gain_n = |n: f64| gain_at(op, w, n.sqrt());

    let mut lo = small.test_amp * small.test_amp;
    let mut hi = 1.0;
    let mut g_hi = gain_n(hi)?;
    while g_hi > kappa {
        lo = hi;
        hi *= 10.0;
        if hi > 1e16 {
            return Err(NumericalError::NonMonotoneGain {
                samples: vec![(hi, g_hi)],
            });
        }
        g_hi = gain_n(hi)?;
    }

    // Verify saturation is monotone over the bracket before bisecting.
    const SAMPLES: usize = 16;
    let ratio = (hi / lo).powf(1.0 / (SAMPLES - 1) as f64);
    let mut samples = Vec::with_capacity(SAMPLES);
    let mut n = lo;
    for _ in 0..SAMPLES {
        samples.push((n, gain_n(n)?));
        n *= ratio;
    }
    let monotone = samples
        .windows(2)
        .all(|p| p[1].1 <= p[0].1 + 1e-9 * p[0].1.abs().max(kappa));
    if !monotone {
        return Err(NumericalError::NonMonotoneGain { samples });
    }

    while hi / lo - 1.0 > PHOTON_REL_TOL {
        let mid = (lo * hi).sqrt();
        if gain_n(mid)? > kappa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// Sampled saturation curve G(n) over log-spaced photon numbers, rad/µs.
pub fn gain_curve(op: &OperatingPoint, photons: &[f64]) -> Result<Vec<f64>, NumericalError> {
    let w = pump_rate(op)?;
    photons.iter().map(|&n| gain_at(op, w, n.sqrt())).collect()
}
