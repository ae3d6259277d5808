//! FFT plumbing and periodograms.
//!
//! Spectral coefficients follow the grid convention: the time envelope is
//! `A(t_n) = Σ_k c_k exp(−2πi·kn/N)`, which is rustfft's forward transform
//! of `c`. The analysis direction is therefore the inverse transform
//! scaled by 1/N, and Σ|c_k|² equals the mean power.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::field::PolarizedField;

pub struct SpectralPlan {
    synthesis: Arc<dyn Fft<f64>>,
    analysis: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    scale: f64,
}

impl SpectralPlan {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let synthesis = planner.plan_fft_forward(n);
        let analysis = planner.plan_fft_inverse(n);
        let scratch_len = synthesis
            .get_inplace_scratch_len()
            .max(analysis.get_inplace_scratch_len());
        Self {
            synthesis,
            analysis,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            scale: 1.0 / n as f64,
        }
    }

    /// Time samples → spectral coefficients, in place.
    pub fn to_spectrum(&mut self, buf: &mut [Complex64]) {
        self.analysis.process_with_scratch(buf, &mut self.scratch);
        let s = self.scale;
        buf.iter_mut().for_each(|c| *c *= s);
    }

    /// Analysis transform without the 1/N factor; callers fold
    /// [`Self::scale`] into a later multiplication.
    pub fn to_spectrum_unscaled(&mut self, buf: &mut [Complex64]) {
        self.analysis.process_with_scratch(buf, &mut self.scratch);
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Spectral coefficients → time samples, in place.
    pub fn to_time(&mut self, buf: &mut [Complex64]) {
        self.synthesis.process_with_scratch(buf, &mut self.scratch);
    }
}

/// Per-polarization power spectral density, W/Hz, in FFT order.
pub fn periodogram(field: &PolarizedField) -> (Vec<f64>, Vec<f64>) {
    let mut plan = SpectralPlan::new(field.grid.n_points());
    let df = field.grid.df();
    let mut psd = |a: &[Complex64]| {
        let mut buf = a.to_vec();
        plan.to_spectrum(&mut buf);
        buf.iter().map(|c| c.norm_sqr() / df).collect::<Vec<f64>>()
    };
    (psd(&field.ax), psd(&field.ay))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeFrequencyGrid;

    #[test]
    fn roundtrip_and_parseval() {
        let grid = TimeFrequencyGrid::new(1 << 10, 0.1e-9, 1545e-9).unwrap();
        let mut plan = SpectralPlan::new(grid.n_points());
        let orig: Vec<Complex64> = (0..grid.n_points())
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        let mut buf = orig.clone();
        plan.to_spectrum(&mut buf);
        let spec_power: f64 = buf.iter().map(|c| c.norm_sqr()).sum();
        let mean_power: f64 = orig.iter().map(|c| c.norm_sqr()).sum::<f64>() / orig.len() as f64;
        assert!((spec_power - mean_power).abs() < 1e-12);
        plan.to_time(&mut buf);
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn positive_offset_is_negative_time_phase() {
        let grid = TimeFrequencyGrid::new(1 << 10, 0.1e-9, 1545e-9).unwrap();
        let k = 5;
        let f = grid.offset_of_bin(k);
        let dt = grid.dt();
        let mut buf: Vec<Complex64> = (0..grid.n_points())
            .map(|n| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * n as f64 * dt))
            .collect();
        SpectralPlan::new(grid.n_points()).to_spectrum(&mut buf);
        assert!((buf[k].norm() - 1.0).abs() < 1e-12);
    }
}
