//! Discrete time/frequency grid shared by every field in a simulation.
//!
//! Samples are stored in FFT order. A spectral coefficient `c_k` belongs to
//! the envelope component `exp(-i 2π f_k t)`, so a positive offset `f_k`
//! is a higher optical frequency than the grid reference.

use serde::Serialize;

use crate::consts::{frequency_of, wavelength_of, NM, THZ};
use crate::error::{Error, Result};

/// Smallest Nyquist half-span accepted by [`TimeFrequencyGrid::new`].
pub const MIN_HALF_SPAN: f64 = 4.0 * THZ;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeFrequencyGrid {
    n_points: usize,
    time_window: f64,
    reference_frequency: f64,
}

impl TimeFrequencyGrid {
    pub fn new(n_points: usize, time_window: f64, reference_wavelength: f64) -> Result<Self> {
        if !n_points.is_power_of_two() || n_points < 2 {
            return Err(Error::domain(format!(
                "grid size {n_points} is not a power of two"
            )));
        }
        if !(time_window > 0.0) || !time_window.is_finite() {
            return Err(Error::domain(format!("invalid time window {time_window}")));
        }
        if !(reference_wavelength > 0.0) {
            return Err(Error::domain("reference wavelength must be positive"));
        }
        let grid = Self {
            n_points,
            time_window,
            reference_frequency: frequency_of(reference_wavelength),
        };
        if grid.half_span() < MIN_HALF_SPAN {
            return Err(Error::domain(format!(
                "grid half-span {:.3} THz is below the {:.1} THz needed for the carriers",
                grid.half_span() / THZ,
                MIN_HALF_SPAN / THZ
            )));
        }
        Ok(grid)
    }

    /// 2^17 points over 16 ns centred on 1545 nm (62.5 MHz bins, ±4.1 THz).
    pub fn lab_default() -> Self {
        Self::new(1 << 17, 16e-9, 1545.0 * NM).expect("default grid is valid")
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn time_window(&self) -> f64 {
        self.time_window
    }

    pub fn dt(&self) -> f64 {
        self.time_window / self.n_points as f64
    }

    pub fn df(&self) -> f64 {
        1.0 / self.time_window
    }

    pub fn reference_frequency(&self) -> f64 {
        self.reference_frequency
    }

    pub fn reference_wavelength(&self) -> f64 {
        wavelength_of(self.reference_frequency)
    }

    /// Largest representable offset from the reference, n·df/2.
    pub fn half_span(&self) -> f64 {
        self.n_points as f64 * self.df() / 2.0
    }

    /// Signed integer index of FFT bin `k`.
    pub fn signed_index(&self, k: usize) -> i64 {
        let n = self.n_points as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Frequency offset of FFT bin `k`, Hz.
    pub fn offset_of_bin(&self, k: usize) -> f64 {
        self.signed_index(k) as f64 * self.df()
    }

    /// Offsets of every bin in FFT order.
    pub fn frequency_offsets(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.offset_of_bin(k)).collect()
    }

    /// Angular frequency offsets of every bin in FFT order, rad/s.
    pub fn angular_offsets(&self) -> Vec<f64> {
        let two_pi = 2.0 * std::f64::consts::PI;
        (0..self.n_points)
            .map(|k| two_pi * self.offset_of_bin(k))
            .collect()
    }

    /// Nearest bin to a frequency offset, or `None` outside the span.
    pub fn bin_of_offset(&self, offset: f64) -> Option<usize> {
        if !offset.is_finite() {
            return None;
        }
        let idx = (offset / self.df()).round() as i64;
        let n = self.n_points as i64;
        if idx >= n / 2 || idx < -n / 2 {
            return None;
        }
        Some(idx.rem_euclid(n) as usize)
    }

    /// Offset of an absolute optical frequency from the reference.
    pub fn offset_of_frequency(&self, frequency: f64) -> f64 {
        frequency - self.reference_frequency
    }

    pub fn contains_offset(&self, offset: f64) -> bool {
        offset.abs() < self.half_span()
    }

    /// Bin permutation from FFT order to ascending frequency.
    pub fn ascending_order(&self) -> impl Iterator<Item = usize> + '_ {
        let half = self.n_points / 2;
        (half..self.n_points).chain(0..half)
    }
}

impl Default for TimeFrequencyGrid {
    fn default() -> Self {
        Self::lab_default()
    }
}
