//! Physical constants (SI, exact CODATA 2018 definitions where available).

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// Planck constant, J·s.
pub const H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = H / (2.0 * PI);
/// Boltzmann constant, J/K.
pub const KB: f64 = 1.380_649e-23;

/// Unit multipliers.
pub const NM: f64 = 1e-9;
pub const THZ: f64 = 1e12;
pub const GHZ: f64 = 1e9;

/// Optical frequency (Hz) of a vacuum wavelength (m).
#[inline]
pub fn frequency_of(wavelength: f64) -> f64 {
    C / wavelength
}

/// Vacuum wavelength (m) of an optical frequency (Hz).
#[inline]
pub fn wavelength_of(frequency: f64) -> f64 {
    C / frequency
}

/// Linear power ratio of a value in decibels.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}
