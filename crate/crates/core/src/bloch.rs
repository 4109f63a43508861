//! Driven, damped three-level Bloch equations over the ordered basis (g, b, e).
//!
//! In the frame rotating at the MOT frequency on g ↔ b and at the green frame
//! frequency on g ↔ e (σ_xy = |x⟩⟨y|, rates in rad/µs):
//!
//! ```text
//! H  = −Δ_MOT σ_bb − δ_green σ_ee + (Ω_MOT/2)(σ_bg + σ_gb) + g₀(a σ_eg + a* σ_ge)
//! ρ' = −i[H, ρ] + Γ_b D[σ_gb]ρ + Γ_g D[σ_ge]ρ + w D[σ_eg]ρ
//! a' = (−i(Δ_cavity − δ_green) − κ/2) a − i g₀ N ⟨σ_ge⟩
//! ```
//!
//! with D[c]ρ = cρc† − ½{c†c, ρ} and ⟨σ_ge⟩ = ρ[e, g]. The density matrix is
//! vectorized column-major: `vec(ρ)[row + 3·col] = ρ[row, col]`.

use nalgebra::{Matrix3, SMatrix, SVector};
use num_complex::Complex64 as C64;

use crate::error::NumericalError;
use crate::model::{angular, OperatingPoint};

pub const G: usize = 0;
pub const B: usize = 1;
pub const E: usize = 2;

const I: C64 = C64::new(0.0, 1.0);

pub type Super = SMatrix<C64, 9, 9>;
pub type VecRho = SVector<C64, 9>;

/// Index of ρ[row, col] in the column-major vectorization.
#[inline]
pub const fn vec_index(row: usize, col: usize) -> usize {
    row + 3 * col
}

/// Atomic state over (g, b, e).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(pub Matrix3<C64>);

/// Deviations of a density matrix from a physical state.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct StateResiduals {
    /// |tr ρ − 1|
    pub trace: f64,
    /// max |ρ − ρ†|
    pub hermiticity: f64,
    /// max(0, −λ_min(ρ))
    pub negativity: f64,
}

impl StateResiduals {
    pub fn max(&self) -> f64 {
        self.trace.max(self.hermiticity).max(self.negativity)
    }

    pub fn worst(self, other: Self) -> Self {
        Self {
            trace: self.trace.max(other.trace),
            hermiticity: self.hermiticity.max(other.hermiticity),
            negativity: self.negativity.max(other.negativity),
        }
    }
}

impl DensityMatrix {
    pub fn ground() -> Self {
        let mut m = Matrix3::zeros();
        m[(G, G)] = C64::new(1.0, 0.0);
        Self(m)
    }

    pub fn from_vec(v: &VecRho) -> Self {
        Self(Matrix3::from_fn(|r, c| v[vec_index(r, c)]))
    }

    pub fn to_vec(&self) -> VecRho {
        VecRho::from_fn(|k, _| self.0[(k % 3, k / 3)])
    }

    pub fn population(&self, level: usize) -> f64 {
        self.0[(level, level)].re
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn residuals(&self) -> StateResiduals {
        let herm = (self.0 - self.0.adjoint()).camax();
        let sym = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let min_eig = sym.symmetric_eigenvalues().min();
        StateResiduals {
            trace: (self.trace() - C64::new(1.0, 0.0)).norm(),
            hermiticity: herm,
            negativity: (-min_eig).max(0.0),
        }
    }

    /// Check Hermiticity and unit trace to 1e−10 and eigenvalues ≥ −1e−8.
    pub fn is_physical(&self) -> bool {
        let r = self.residuals();
        r.trace <= 1e-10 && r.hermiticity <= 1e-10 && r.negativity <= 1e-8
    }

    /// Project back onto Hermitian, unit-trace matrices.
    pub fn renormalize(&mut self) {
        let sym = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let tr = sym.trace().re;
        self.0 = sym / C64::new(tr, 0.0);
    }
}

/// Rotating-frame choice for the green transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameSpec {
    /// Frequency the g ↔ e frame rotates at, relative to the bare green line, MHz.
    pub delta_green: f64,
    /// Cavity field amplitude in that frame, √photons.
    pub field_amp: C64,
}

impl FrameSpec {
    /// Frame locked to the bare green line.
    pub fn bare(field_amp: C64) -> Self {
        Self { delta_green: 0.0, field_amp }
    }
}

/// Coefficients of the atomic equations in rad/µs.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AtomRates {
    /// Energy of |b⟩ in the frame, −Δ_MOT.
    pub e_b: f64,
    /// Energy of |e⟩ in the frame, −δ_green.
    pub e_e: f64,
    /// Ω_MOT/2.
    pub half_mot: f64,
    /// Coefficient c of c σ_eg + c* σ_ge.
    pub green: C64,
    pub gamma_b: f64,
    pub gamma_g: f64,
    pub pump: f64,
}

impl AtomRates {
    pub fn new(op: &OperatingPoint, delta_green: f64, green: C64, w: f64) -> Self {
        Self {
            e_b: -angular(op.delta_mot),
            e_e: -angular(delta_green),
            half_mot: 0.5 * angular(op.omega_mot),
            green,
            gamma_b: angular(op.atom.gamma_b),
            gamma_g: angular(op.atom.gamma_g),
            pump: w,
        }
    }

    pub fn hamiltonian(&self) -> Matrix3<C64> {
        let mut h = Matrix3::zeros();
        h[(B, B)] = C64::new(self.e_b, 0.0);
        h[(E, E)] = C64::new(self.e_e, 0.0);
        h[(B, G)] = C64::new(self.half_mot, 0.0);
        h[(G, B)] = C64::new(self.half_mot, 0.0);
        h[(E, G)] = self.green;
        h[(G, E)] = self.green.conj();
        h
    }

    /// Closed-form evaluation of dρ/dt.
    pub fn drho(&self, rho: &Matrix3<C64>) -> Matrix3<C64> {
        let h = self.hamiltonian();
        let mut d = (h * rho - rho * h) * (-I);
        jump(&mut d, rho, self.gamma_b, B, G);
        jump(&mut d, rho, self.gamma_g, E, G);
        jump(&mut d, rho, self.pump, G, E);
        d
    }

    pub fn generator(&self) -> Generator {
        let id = Matrix3::<C64>::identity();
        let h = self.hamiltonian();
        let mut l = (spre(&id, &h) - spost(&id, &h)) * (-I);
        for (rate, from, to) in [
            (self.gamma_b, B, G),
            (self.gamma_g, E, G),
            (self.pump, G, E),
        ] {
            if rate != 0.0 {
                l += dissipator(&id, &transition(to, from)) * C64::new(rate, 0.0);
            }
        }
        Generator(l)
    }
}

/// Adds `rate`·D[|to⟩⟨from|]ρ to `d`.
#[inline]
fn jump(d: &mut Matrix3<C64>, rho: &Matrix3<C64>, rate: f64, from: usize, to: usize) {
    if rate == 0.0 {
        return;
    }
    let half = 0.5 * rate;
    d[(to, to)] += rho[(from, from)] * rate;
    for x in 0..3 {
        d[(from, x)] -= rho[(from, x)] * half;
        d[(x, from)] -= rho[(x, from)] * half;
    }
}

fn transition(to: usize, from: usize) -> Matrix3<C64> {
    let mut m = Matrix3::zeros();
    m[(to, from)] = C64::new(1.0, 0.0);
    m
}

fn spre(id: &Matrix3<C64>, a: &Matrix3<C64>) -> Super {
    let k = id.kronecker(a);
    Super::from_fn(|r, c| k[(r, c)])
}

fn spost(id: &Matrix3<C64>, a: &Matrix3<C64>) -> Super {
    let k = a.transpose().kronecker(id);
    Super::from_fn(|r, c| k[(r, c)])
}

fn dissipator(id: &Matrix3<C64>, c: &Matrix3<C64>) -> Super {
    let cdc = c.adjoint() * c;
    let k = c.map(|z| z.conj()).kronecker(c);
    let sandwich = Super::from_fn(|r, col| k[(r, col)]);
    let half = C64::new(0.5, 0.0);
    sandwich - (spre(id, &cdc) + spost(id, &cdc)) * half
}

/// Vectorized time-independent Liouvillian: vec(dρ/dt) = L·vec(ρ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Generator(pub Super);

impl Generator {
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_vec(&(self.0 * rho.to_vec()))
    }

    /// The row functional giving d(tr ρ)/dt; zero for a trace-preserving L.
    pub fn trace_functional(&self) -> SVector<C64, 9> {
        let mut out = SVector::<C64, 9>::zeros();
        for k in [vec_index(G, G), vec_index(B, B), vec_index(E, E)] {
            for c in 0..9 {
                out[c] += self.0[(k, c)];
            }
        }
        out
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        // Schur form of a general complex matrix.
        let schur = nalgebra::Schur::new(self.0);
        let (_, t) = schur.unpack();
        (0..9).map(|i| t[(i, i)]).collect()
    }
}

/// Liouvillian for the operating point `op` with the field frozen at
/// `frame.field_amp` and incoherent pump rate `w` (rad/µs).
pub fn build_generator(op: &OperatingPoint, frame: &FrameSpec, w: f64) -> Generator {
    let g0 = angular(op.cavity.g0);
    AtomRates::new(op, frame.delta_green, frame.field_amp * g0, w).generator()
}

/// Unique trace-one null vector of `l`, obtained by replacing the dρ_gg/dt row
/// with the trace constraint.
pub fn steady_state(l: &Generator) -> Result<DensityMatrix, NumericalError> {
    let mut a = l.0;
    let row = vec_index(G, G);
    for c in 0..9 {
        a[(row, c)] = C64::new(0.0, 0.0);
    }
    for k in [vec_index(G, G), vec_index(B, B), vec_index(E, E)] {
        a[(row, k)] = C64::new(1.0, 0.0);
    }
    let sv = a.singular_values();
    let rcond = sv.min() / sv.max();
    if !(rcond > 1e-13) {
        return Err(NumericalError::SingularSteadyState { rcond });
    }
    let mut rhs = VecRho::zeros();
    rhs[row] = C64::new(1.0, 0.0);
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or(NumericalError::SingularSteadyState { rcond })?;
    let mut rho = DensityMatrix::from_vec(&x);
    // The solve is exact up to roundoff; remove the antihermitian roundoff.
    rho.0 = (rho.0 + rho.0.adjoint()) * C64::new(0.5, 0.0);
    Ok(rho)
}

/// Coupled mean-field right-hand side with precomputed coefficients.
#[derive(Clone, Copy, Debug)]
pub struct MeanField {
    rates: AtomRates,
    g0: f64,
    collective: f64,
    field_rate: C64,
}

impl MeanField {
    pub fn new(op: &OperatingPoint, w: f64, delta_green: f64) -> Self {
        let g0 = angular(op.cavity.g0);
        let kappa = angular(op.cavity.kappa);
        Self {
            rates: AtomRates::new(op, delta_green, C64::new(0.0, 0.0), w),
            g0,
            collective: g0 * op.cavity.n_atoms,
            field_rate: C64::new(-0.5 * kappa, -angular(op.delta_cavity - delta_green)),
        }
    }

    /// Derivatives of (ρ, a). `extra` is added to the g ↔ e coupling
    /// coefficient, e.g. a coherent pump term.
    #[inline]
    pub fn eval(&self, rho: &Matrix3<C64>, a: C64, extra: C64) -> (Matrix3<C64>, C64) {
        let mut rates = self.rates;
        rates.green = a * self.g0 + extra;
        let d_rho = rates.drho(rho);
        let d_a = self.field_rate * a - I * self.collective * rho[(E, G)];
        (d_rho, d_a)
    }
}

/// Mean-field derivatives (dρ/dt, da/dt) in rad/µs, with the field equation
/// factorized as ⟨aσ⟩ = ⟨a⟩⟨σ⟩.
pub fn rhs(
    rho: &DensityMatrix,
    a: C64,
    op: &OperatingPoint,
    w: f64,
    frame: &FrameSpec,
) -> (DensityMatrix, C64) {
    let mf = MeanField::new(op, w, frame.delta_green);
    let (d, da) = mf.eval(&rho.0, a, C64::new(0.0, 0.0));
    (DensityMatrix(d), da)
}

/// Steady state of the atoms driven by a weak coherent green probe of Rabi
/// frequency `omega_probe` (MHz) at frequency `delta_probe` from the bare line,
/// with the MOT on, no cavity field and no incoherent pump.
pub(crate) fn probe_steady_state(
    op: &OperatingPoint,
    delta_probe: f64,
    omega_probe: f64,
) -> Result<DensityMatrix, NumericalError> {
    let rates = AtomRates::new(op, delta_probe, C64::new(0.5 * angular(omega_probe), 0.0), 0.0);
    steady_state(&rates.generator())
}
