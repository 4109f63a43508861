//! Semiclassical model of a cold-atom cavity laser on a narrow intercombination
//! line, pumped incoherently and dressed by strong cooling light.
//!
//! - [`model`]: parameters, units, dressed states, derived constants
//! - [`pump`]: effective incoherent pump rate from the dressed steady state
//! - [`bloch`]: three-level Liouvillian, steady states, mean-field right-hand side
//! - [`threshold`]: small-signal gain, lasing predicate, threshold power, gain clamping
//! - [`dynamics`]: time integration and spectral analysis of the cavity field
//! - [`sweep`]: parallel parameter maps, checkpoints, contours
//! - [`io`]: configuration files, CSV/JSON-lines export, SVG heatmaps

pub mod bloch;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod model;
pub mod pump;
pub mod sweep;
pub mod threshold;

pub use error::{ModelError, NumericalError};
pub use model::{AtomSpec, CavitySpec, OperatingPoint, PowerCalibration};
