//! Two-component field envelopes on a shared grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::TimeFrequencyGrid;
use crate::polarization::JonesMatrix;

/// Time-domain envelopes on x̂ and ŷ, in √W.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedField {
    pub grid: TimeFrequencyGrid,
    pub ax: Vec<Complex64>,
    pub ay: Vec<Complex64>,
}

impl PolarizedField {
    pub fn zeros(grid: &TimeFrequencyGrid) -> Self {
        let n = grid.n_points();
        Self {
            grid: grid.clone(),
            ax: vec![Complex64::new(0.0, 0.0); n],
            ay: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// mean(|ax|² + |ay|²), W.
    pub fn average_power(&self) -> f64 {
        let sum: f64 = self
            .ax
            .iter()
            .zip(&self.ay)
            .map(|(x, y)| x.norm_sqr() + y.norm_sqr())
            .sum();
        sum / self.ax.len() as f64
    }

    /// Σ(|ax|² + |ay|²)·dt, J.
    pub fn energy(&self) -> f64 {
        self.average_power() * self.grid.time_window()
    }

    pub fn power_x(&self) -> f64 {
        self.ax.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.ax.len() as f64
    }

    pub fn power_y(&self) -> f64 {
        self.ay.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.ay.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.ax
            .iter()
            .chain(&self.ay)
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// Applies one Jones matrix to every sample.
    pub fn rotated(&self, u: &JonesMatrix) -> Self {
        let mut out = self.clone();
        for (x, y) in out.ax.iter_mut().zip(out.ay.iter_mut()) {
            let (nx, ny) = u.apply(*x, *y);
            *x = nx;
            *y = ny;
        }
        out
    }

    /// Scales amplitudes so power changes by `factor`.
    pub fn scaled_power(&self, factor: f64) -> Self {
        let s = factor.sqrt();
        let mut out = self.clone();
        out.ax
            .iter_mut()
            .chain(out.ay.iter_mut())
            .for_each(|a| *a *= s);
        out
    }

    fn add_assign(&mut self, other: &PolarizedField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        for (a, b) in self.ax.iter_mut().zip(&other.ax) {
            *a += b;
        }
        for (a, b) in self.ay.iter_mut().zip(&other.ay) {
            *a += b;
        }
        Ok(())
    }
}

/// Lossless element-wise sum of fields on one grid.
pub fn superpose(fields: &[PolarizedField]) -> Result<PolarizedField> {
    let (first, rest) = fields
        .split_first()
        .ok_or_else(|| Error::domain("superpose needs at least one field"))?;
    let mut out = first.clone();
    for f in rest {
        out.add_assign(f)?;
    }
    Ok(out)
}
