//! Physical parameters, unit conversions and dressed-state algebra.
//!
//! Every value that crosses a public boundary is a technical frequency in MHz
//! (or mW, m, nm). Equations of motion run on angular rates in rad/µs, with
//! time in µs. [`angular`] and [`technical`] are the only conversion points.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Technical MHz → rad/µs.
#[inline]
pub fn angular(mhz: f64) -> f64 {
    2.0 * PI * mhz
}

/// rad/µs → technical MHz.
#[inline]
pub fn technical(rad_per_us: f64) -> f64 {
    rad_per_us / (2.0 * PI)
}

/// Two optical transitions sharing the ground state: a broad cooling line
/// (g ↔ b) and a narrow intercombination line (g ↔ e).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    /// Decay rate of the broad excited level b, MHz.
    pub gamma_b: f64,
    /// Decay rate of the narrow excited level e, MHz.
    pub gamma_g: f64,
    /// Blue (cooling) wavelength, nm.
    pub lambda_b: f64,
    /// Green (lasing) wavelength, nm.
    pub lambda_g: f64,
}

impl Default for AtomSpec {
    fn default() -> Self {
        Self {
            gamma_b: 29.1,
            gamma_g: 0.1824,
            lambda_b: 399.0,
            lambda_g: 556.0,
        }
    }
}

impl AtomSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("gamma_b", self.gamma_b),
            ("gamma_g", self.gamma_g),
            ("lambda_b", self.lambda_b),
            ("lambda_g", self.lambda_g),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.gamma_b <= self.gamma_g {
            return Err(ModelError::Invalid(format!(
                "gamma_b ({}) must exceed gamma_g ({})",
                self.gamma_b, self.gamma_g
            )));
        }
        Ok(())
    }
}

/// Single-mode cavity resonant with the narrow line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    /// Energy (photon-number) decay rate, MHz. The field amplitude decays at half this.
    pub kappa: f64,
    /// Single-atom vacuum Rabi frequency, MHz.
    pub g0: f64,
    /// Mirror spacing, m.
    pub length_m: f64,
    /// Power transmission of one mirror.
    pub t_mirror: f64,
    /// Effective number of atoms coupled to the mode.
    pub n_atoms: f64,
}

impl Default for CavitySpec {
    fn default() -> Self {
        Self {
            kappa: 0.070,
            g0: 0.066,
            length_m: 0.0478,
            t_mirror: 1.5e-6,
            n_atoms: 75_000.0,
        }
    }
}

impl CavitySpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(ModelError::Invalid(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.g0.is_finite() && self.g0 > 0.0) {
            return Err(ModelError::Invalid(format!("g0 must be positive, got {}", self.g0)));
        }
        if !(self.length_m.is_finite() && self.length_m > 0.0) {
            return Err(ModelError::Invalid(format!(
                "length_m must be positive, got {}",
                self.length_m
            )));
        }
        if !(self.n_atoms.is_finite() && self.n_atoms >= 0.0) {
            return Err(ModelError::Invalid(format!(
                "n_atoms must be non-negative, got {}",
                self.n_atoms
            )));
        }
        if !(self.t_mirror > 0.0 && self.t_mirror < 1.0) {
            return Err(ModelError::Invalid(format!(
                "t_mirror must lie in (0, 1), got {}",
                self.t_mirror
            )));
        }
        Ok(())
    }
}

/// All drive, cavity and atom parameters of one simulation cell. Detunings are
/// drive frequency minus the respective bare line (cavity: minus the bare green
/// line), in MHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub delta_mot: f64,
    pub delta_pump: f64,
    pub delta_cavity: f64,
    pub omega_mot: f64,
    pub omega_pump: f64,
    pub atom: AtomSpec,
    pub cavity: CavitySpec,
}

impl Default for OperatingPoint {
    fn default() -> Self {
        Self {
            delta_mot: -30.0,
            delta_pump: 0.0,
            delta_cavity: -30.0,
            omega_mot: 19.0,
            omega_pump: 1.5,
            atom: AtomSpec::default(),
            cavity: CavitySpec::default(),
        }
    }
}

impl OperatingPoint {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.atom.validate()?;
        self.cavity.validate()?;
        for (name, v) in [
            ("delta_mot", self.delta_mot),
            ("delta_pump", self.delta_pump),
            ("delta_cavity", self.delta_cavity),
        ] {
            if !v.is_finite() {
                return Err(ModelError::Invalid(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in [("omega_mot", self.omega_mot), ("omega_pump", self.omega_pump)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::Invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Largest detuning magnitude among the three fields, MHz.
    pub fn max_abs_detuning(&self) -> f64 {
        self.delta_mot
            .abs()
            .max(self.delta_pump.abs())
            .max(self.delta_cavity.abs())
    }
}

/// Square-root intensity map Ω = k·√P for each drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerCalibration {
    /// Green pump, MHz per √mW.
    pub k_pump: f64,
    /// Blue MOT, MHz per √mW.
    pub k_mot: f64,
}

impl Default for PowerCalibration {
    /// 1.5 MHz at 5.7 mW for the pump; 19 MHz at 20 mW for the MOT.
    fn default() -> Self {
        Self {
            k_pump: 1.5 / 5.7_f64.sqrt(),
            k_mot: 19.0 / 20.0_f64.sqrt(),
        }
    }
}

impl PowerCalibration {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.k_pump.is_finite() && self.k_pump > 0.0 && self.k_mot.is_finite() && self.k_mot > 0.0) {
            return Err(ModelError::Invalid(format!(
                "calibration constants must be positive, got k_pump = {}, k_mot = {}",
                self.k_pump, self.k_mot
            )));
        }
        Ok(())
    }

    pub fn pump_rabi(&self, power_mw: f64) -> Result<f64, ModelError> {
        rabi_from_power(power_mw, self.k_pump)
    }

    pub fn mot_rabi(&self, power_mw: f64) -> Result<f64, ModelError> {
        rabi_from_power(power_mw, self.k_mot)
    }
}

/// Rabi frequency (MHz) produced by `power_mw` of light given a calibration
/// constant `k` in MHz/√mW.
pub fn rabi_from_power(power_mw: f64, k: f64) -> Result<f64, ModelError> {
    if !(power_mw >= 0.0) || !power_mw.is_finite() {
        return Err(ModelError::Domain(format!("power must be non-negative, got {power_mw} mW")));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(ModelError::Domain(format!("calibration must be positive, got {k}")));
    }
    Ok(k * power_mw.sqrt())
}

/// Eigen-decomposition of the MOT-dressed ground manifold {g, b}.
///
/// The "minus" state is the one with the smaller energy; for red MOT detuning
/// it is mostly |g⟩ and is the state the pump addresses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DressedPair {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub cg_minus: f64,
    pub cb_minus: f64,
    pub cg_plus: f64,
    pub cb_plus: f64,
}

/// Dressed energies and eigenvectors of H = −Δ_MOT|b⟩⟨b| + (Ω_MOT/2)(|b⟩⟨g| + |g⟩⟨b|).
pub fn dressed_states(delta_mot: f64, omega_mot: f64) -> DressedPair {
    let half = 0.5 * omega_mot;
    let root = delta_mot.hypot(omega_mot);
    // Numerically stable pair: compute the larger-magnitude root directly and
    // obtain the other from the product λ₊λ₋ = −Ω²/4.
    let (lambda_minus, lambda_plus) = if root == 0.0 {
        (0.0, 0.0)
    } else if -delta_mot >= 0.0 {
        let plus = 0.5 * (-delta_mot + root);
        (-(half * half) / plus, plus)
    } else {
        let minus = 0.5 * (-delta_mot - root);
        (minus, -(half * half) / minus)
    };

    // Eigenvector of [[0, h], [h, −Δ]] for eigenvalue λ is ∝ (h, λ) or, when
    // that vanishes, (λ + Δ, h). Pick the better conditioned form.
    let vector = |lambda: f64, fallback: (f64, f64)| -> (f64, f64) {
        let (a, b) = (half, lambda);
        let (c, d) = (lambda + delta_mot, half);
        let n1 = a.hypot(b);
        let n2 = c.hypot(d);
        if n1 == 0.0 && n2 == 0.0 {
            fallback
        } else if n1 >= n2 {
            (a / n1, b / n1)
        } else {
            (c / n2, d / n2)
        }
    };

    // Bare limit: the lower state is |g⟩ when −Δ > 0, otherwise |b⟩.
    let (fb_minus, fb_plus) = if -delta_mot >= 0.0 {
        ((1.0, 0.0), (0.0, 1.0))
    } else {
        ((0.0, 1.0), (1.0, 0.0))
    };
    let (mut cg_minus, mut cb_minus) = vector(lambda_minus, fb_minus);
    let (mut cg_plus, mut cb_plus) = vector(lambda_plus, fb_plus);
    if omega_mot == 0.0 {
        (cg_minus, cb_minus) = fb_minus;
        (cg_plus, cb_plus) = fb_plus;
    }
    // Sign convention: g amplitude non-negative for the minus state, b amplitude
    // non-negative for the plus state.
    if cg_minus < 0.0 || (cg_minus == 0.0 && cb_minus < 0.0) {
        cg_minus = -cg_minus;
        cb_minus = -cb_minus;
    }
    if cb_plus < 0.0 || (cb_plus == 0.0 && cg_plus < 0.0) {
        cg_plus = -cg_plus;
        cb_plus = -cb_plus;
    }
    DressedPair {
        lambda_minus,
        lambda_plus,
        cg_minus,
        cb_minus,
        cg_plus,
        cb_plus,
    }
}

/// Complex dressed energies when b also decays at `gamma_b` (MHz): the
/// eigenvalues of the non-Hermitian H − i(Γ_b/2)|b⟩⟨b|. Real parts are line
/// positions, −imaginary parts are amplitude damping rates, all in MHz.
///
/// Returned as (minus, plus), ordered by real part.
pub fn damped_dressed_energies(delta_mot: f64, omega_mot: f64, gamma_b: f64) -> (Complex64, Complex64) {
    let z = Complex64::new(-delta_mot, -0.5 * gamma_b);
    let disc = (z * z + omega_mot * omega_mot).sqrt();
    let a = 0.5 * (z - disc);
    let b = 0.5 * (z + disc);
    if a.re <= b.re {
        (a, b)
    } else {
        (b, a)
    }
}

/// Closed-form cross-check of the incoherent pump profile: one Lorentzian per
/// damped dressed state, weighted by its |g⟩ content. Line centres sit at
/// Δ_pump = −Re(λ), half-widths are the dressed damping plus Γ_g/2.
///
/// Returns an unnormalized profile; only peak positions are meaningful.
pub fn dressed_pump_profile(op: &OperatingPoint, delta_pump: f64) -> f64 {
    let pair = dressed_states(op.delta_mot, op.omega_mot);
    let (lm, lp) = damped_dressed_energies(op.delta_mot, op.omega_mot, op.atom.gamma_b);
    let lorentz = |lambda: Complex64, weight: f64| {
        let hw = -lambda.im + 0.5 * op.atom.gamma_g;
        let d = delta_pump + lambda.re;
        weight * hw / (hw * hw + d * d)
    };
    // The plus state is barely populated in the dressed steady state; weight
    // it by its g content times the b-like population fraction.
    let pop_plus = pair.cg_plus.powi(2) * pair.cb_plus.powi(2);
    lorentz(lm, pair.cg_minus.powi(2)) + lorentz(lp, pop_plus * pair.cg_plus.powi(2))
}

/// Quantities that follow directly from the atom and cavity specs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedParams {
    /// g₀√N, MHz.
    pub omega_cavity_collective: f64,
    /// g₀²/(κ·Γ_g).
    pub c1: f64,
    /// 2L/c, s.
    pub round_trip_s: f64,
    /// Power leaving through one mirror per intracavity photon, W.
    pub watts_per_photon: f64,
}

pub fn derived_params(cavity: &CavitySpec, atom: &AtomSpec) -> DerivedParams {
    let round_trip_s = 2.0 * cavity.length_m / SPEED_OF_LIGHT;
    let photon_j = PLANCK * SPEED_OF_LIGHT / (atom.lambda_g * 1e-9);
    DerivedParams {
        omega_cavity_collective: cavity.g0 * cavity.n_atoms.sqrt(),
        c1: cavity.g0 * cavity.g0 / (cavity.kappa * atom.gamma_g),
        round_trip_s,
        watts_per_photon: photon_j * cavity.t_mirror / round_trip_s,
    }
}
