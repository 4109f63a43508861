use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericalError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("steady state is singular or ill-conditioned (reciprocal condition {rcond:.3e})")]
    SingularSteadyState { rcond: f64 },
    #[error("pump-rate linear-response refinement did not converge (last iterates {previous:.6e}, {last:.6e})")]
    PumpRateNotConverged { previous: f64, last: f64 },
    #[error("small-signal gain did not converge after test-field halvings: {sequence:?}")]
    GainNotConverged { sequence: Vec<f64> },
    #[error("no lasing threshold inside bracket [{low_mw}, {high_mw}] mW")]
    NoThreshold { low_mw: f64, high_mw: f64 },
    #[error("gain is not monotone in photon number over the bracket: {samples:?}")]
    NonMonotoneGain { samples: Vec<(f64, f64)> },
    #[error("integration diverged at t = {t_us} µs (residual {residual:.3e})")]
    IntegrationDiverged { t_us: f64, residual: f64 },
    #[error("step-doubling check still fails after {halvings} dt halvings (dt = {dt_us:e} µs, mismatch {mismatch:.3e})")]
    Stiff { halvings: u32, dt_us: f64, mismatch: f64 },
    #[error("no spectral peak above threshold (mean photons {mean_photons:.3e}, peak/floor {contrast:.3e})")]
    BelowThreshold { mean_photons: f64, contrast: f64 },
    #[error("invalid simulation setting: {0}")]
    Config(String),
}
