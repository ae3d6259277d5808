//! Simulation of dual-pump Bragg-scattering four-wave mixing in highly
//! nonlinear fiber, from vector split-step propagation down to gated
//! photon-counter click rates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod consts;
pub mod coupled_mode;
pub mod detection;
pub mod error;
pub mod fiber;
pub mod field;
pub mod grid;
pub mod harness;
pub mod polarization;
pub mod raman;
pub mod sources;
pub mod spectral;
pub mod ssfm;
pub mod wavelength;

pub use config::ScenarioConfig;
pub use error::{Error, Result};
pub use fiber::FiberSpec;
pub use field::PolarizedField;
pub use grid::TimeFrequencyGrid;
pub use polarization::{JonesVector, PolarizationCase};
