//! Input fields: monochromatic lasers and broadband frequency-shifted
//! feedback pumps.
//!
//! Broadband pumps are stationary Gaussian noise: each spectral bin holds a
//! circular complex Gaussian amplitude whose variance follows the pump's
//! power profile. Carriers are placed on the nearest grid bin, so a CW line
//! is periodic over the window and occupies exactly one bin.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::consts::frequency_of;
use crate::error::{Error, Result};
use crate::field::PolarizedField;
use crate::grid::TimeFrequencyGrid;
use crate::polarization::JonesVector;
use crate::spectral::SpectralPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SourceKind {
    Cw,
    Ifsfl,
}

/// Power spectral profile of a broadband source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectralShape {
    Gaussian,
    FlatTop,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceSpec {
    pub kind: SourceKind,
    /// Average power, W.
    pub power: f64,
    /// m
    pub wavelength: f64,
    /// FWHM, Hz. Ignored for CW.
    pub bandwidth: f64,
    #[serde(skip)]
    pub jones: JonesVector,
    pub shape: SpectralShape,
    /// Realization seed (broadband sources only).
    pub seed: u64,
    /// ChaCha stream, separates sources sharing one seed.
    pub stream: u64,
}

impl SourceSpec {
    pub fn cw(power: f64, wavelength: f64, jones: JonesVector) -> Self {
        Self {
            kind: SourceKind::Cw,
            power,
            wavelength,
            bandwidth: 0.0,
            jones,
            shape: SpectralShape::Gaussian,
            seed: 0,
            stream: 0,
        }
    }

    pub fn ifsfl(
        power: f64,
        wavelength: f64,
        bandwidth: f64,
        jones: JonesVector,
        seed: u64,
    ) -> Self {
        Self {
            kind: SourceKind::Ifsfl,
            power,
            wavelength,
            bandwidth,
            jones,
            shape: SpectralShape::Gaussian,
            seed,
            stream: 0,
        }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.power >= 0.0) || !self.power.is_finite() {
            return Err(Error::domain(format!(
                "source power {} must be >= 0",
                self.power
            )));
        }
        if !(self.bandwidth >= 0.0) {
            return Err(Error::domain("source bandwidth must be >= 0"));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::domain("source wavelength must be positive"));
        }
        Ok(())
    }
}

/// Grid offset of a source carrier, snapped to the nearest bin.
pub fn carrier_bin(wavelength: f64, grid: &TimeFrequencyGrid) -> Result<usize> {
    let offset = grid.offset_of_frequency(frequency_of(wavelength));
    grid.bin_of_offset(offset).ok_or_else(|| {
        Error::domain(format!(
            "carrier at {:.3} nm ({:+.3} THz) lies outside the ±{:.3} THz grid",
            wavelength * 1e9,
            offset * 1e-12,
            grid.half_span() * 1e-12
        ))
    })
}

fn place(spec: &SourceSpec, grid: &TimeFrequencyGrid, envelope: Vec<Complex64>) -> PolarizedField {
    let mut field = PolarizedField::zeros(grid);
    let (jx, jy) = (spec.jones.cx, spec.jones.cy);
    if jx != Complex64::new(0.0, 0.0) {
        for (o, e) in field.ax.iter_mut().zip(&envelope) {
            *o = jx * e;
        }
    }
    if jy != Complex64::new(0.0, 0.0) {
        for (o, e) in field.ay.iter_mut().zip(&envelope) {
            *o = jy * e;
        }
    }
    field
}

/// Ideal monochromatic carrier with |a|² = power.
pub fn make_cw(spec: &SourceSpec, grid: &TimeFrequencyGrid) -> Result<PolarizedField> {
    spec.validate()?;
    let bin = carrier_bin(spec.wavelength, grid)?;
    let n = grid.n_points();
    let amp = spec.power.sqrt();
    let idx = grid.signed_index(bin);
    let two_pi = 2.0 * std::f64::consts::PI;
    let envelope = (0..n)
        .map(|j| {
            // Exact phase via integer arithmetic, (k·j mod N)/N.
            let m = (idx * j as i64).rem_euclid(n as i64);
            Complex64::from_polar(amp, -two_pi * m as f64 / n as f64)
        })
        .collect();
    Ok(place(spec, grid, envelope))
}

/// Power profile weights over the grid, normalized to unit sum.
fn profile(spec: &SourceSpec, grid: &TimeFrequencyGrid, center: f64) -> Vec<f64> {
    let fwhm = spec.bandwidth;
    let mut w: Vec<f64> = (0..grid.n_points())
        .map(|k| {
            let d = grid.offset_of_bin(k) - center;
            match spec.shape {
                SpectralShape::Gaussian => {
                    let x = d / fwhm;
                    let e = 4.0 * std::f64::consts::LN_2 * x * x;
                    if e > 700.0 {
                        0.0
                    } else {
                        (-e).exp()
                    }
                }
                SpectralShape::FlatTop => {
                    if d.abs() <= 0.5 * fwhm {
                        1.0
                    } else {
                        0.0
                    }
                }
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// One random realization of a broadband pump; reproducible per seed.
pub fn make_ifsfl(spec: &SourceSpec, grid: &TimeFrequencyGrid) -> Result<PolarizedField> {
    spec.validate()?;
    if !(spec.bandwidth > 0.0) {
        return Err(Error::domain("broadband source needs bandwidth > 0"));
    }
    let bin = carrier_bin(spec.wavelength, grid)?;
    let center = grid.offset_of_bin(bin);
    if !grid.contains_offset(center + 3.0 * spec.bandwidth)
        || !grid.contains_offset(center - 3.0 * spec.bandwidth)
    {
        return Err(Error::domain(format!(
            "bandwidth {:.1} GHz too large for the grid around {:.3} nm",
            spec.bandwidth * 1e-9,
            spec.wavelength * 1e9
        )));
    }
    if spec.bandwidth < 2.0 * grid.df() {
        return Err(Error::domain(format!(
            "bandwidth {:.3} GHz is not resolved by {:.3} GHz bins",
            spec.bandwidth * 1e-9,
            grid.df() * 1e-9
        )));
    }
    let weights = profile(spec, grid, center);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(spec.stream);
    let mut spectrum: Vec<Complex64> = weights
        .iter()
        .map(|w| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * (spec.power * w / 2.0).sqrt()
        })
        .collect();
    SpectralPlan::new(grid.n_points()).to_time(&mut spectrum);
    Ok(place(spec, grid, spectrum))
}

pub fn make_source(spec: &SourceSpec, grid: &TimeFrequencyGrid) -> Result<PolarizedField> {
    match spec.kind {
        SourceKind::Cw => make_cw(spec, grid),
        SourceKind::Ifsfl => make_ifsfl(spec, grid),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::{GHZ, NM};
    use crate::field::superpose;
    use crate::spectral::periodogram;

    fn small_grid() -> TimeFrequencyGrid {
        // 2^13 bins over 1 ns: 1 GHz resolution, ±4.1 THz.
        TimeFrequencyGrid::new(1 << 13, 1e-9, 1545.0 * NM).unwrap()
    }

    #[test]
    fn on_center_cw() {
        let grid = small_grid();
        let f = make_cw(&SourceSpec::cw(1.0, 1545.0 * NM, JonesVector::x()), &grid).unwrap();
        assert!(f
            .ax
            .iter()
            .all(|a| (a - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        assert!(f.ay.iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn cw_power_and_single_bin() {
        let grid = TimeFrequencyGrid::lab_default();
        let spec = SourceSpec::cw(5e-3, 1549.2 * NM, JonesVector::x());
        let f = make_cw(&spec, &grid).unwrap();
        assert!((f.average_power() - 5e-3).abs() < 1e-12);
        let (px, _) = periodogram(&f);
        let bin = carrier_bin(spec.wavelength, &grid).unwrap();
        let total: f64 = px.iter().sum();
        assert!((px[bin] - total).abs() / total < 1e-12);
    }

    #[test]
    fn zero_power_cw_is_zero() {
        let grid = small_grid();
        let f = make_cw(&SourceSpec::cw(0.0, 1549.2 * NM, JonesVector::y()), &grid).unwrap();
        assert_eq!(f.average_power(), 0.0);
    }

    #[test]
    fn carrier_outside_grid() {
        let grid = small_grid();
        let r = make_cw(&SourceSpec::cw(1e-3, 1300.0 * NM, JonesVector::x()), &grid);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn same_seed_identical() {
        let grid = small_grid();
        let spec = SourceSpec::ifsfl(22e-3, 1540.7 * NM, 44.0 * GHZ, JonesVector::x(), 42);
        assert_eq!(
            make_ifsfl(&spec, &grid).unwrap(),
            make_ifsfl(&spec, &grid).unwrap()
        );
        let other = SourceSpec {
            seed: 43,
            ..spec.clone()
        };
        assert_ne!(
            make_ifsfl(&spec, &grid).unwrap(),
            make_ifsfl(&other, &grid).unwrap()
        );
        let other = spec.clone().with_stream(1);
        assert_ne!(
            make_ifsfl(&spec, &grid).unwrap(),
            make_ifsfl(&other, &grid).unwrap()
        );
    }

    #[test]
    fn ensemble_mean_power() {
        let grid = TimeFrequencyGrid::lab_default();
        let mean: f64 = (0..20)
            .map(|seed| {
                let spec =
                    SourceSpec::ifsfl(22e-3, 1540.7 * NM, 44.0 * GHZ, JonesVector::x(), seed);
                make_ifsfl(&spec, &grid).unwrap().average_power()
            })
            .sum::<f64>()
            / 20.0;
        assert!((mean - 22e-3).abs() / 22e-3 < 0.05, "{mean}");
    }

    #[test]
    fn fitted_fwhm_matches_spec() {
        let grid = small_grid();
        let n = grid.n_points();
        let mut acc = vec![0.0; n];
        for seed in 0..100 {
            let spec = SourceSpec::ifsfl(15e-3, 1563.9 * NM, 50.0 * GHZ, JonesVector::x(), seed);
            let (px, _) = periodogram(&make_ifsfl(&spec, &grid).unwrap());
            acc.iter_mut().zip(&px).for_each(|(a, p)| *a += p);
        }
        // Periodogram oracle: second moment of the averaged PSD → Gaussian FWHM.
        let f = grid.frequency_offsets();
        let w: f64 = acc.iter().sum();
        let mean: f64 = acc.iter().zip(&f).map(|(p, f)| p * f).sum::<f64>() / w;
        let var: f64 = acc
            .iter()
            .zip(&f)
            .map(|(p, f)| p * (f - mean).powi(2))
            .sum::<f64>()
            / w;
        let fwhm = var.sqrt() * (8.0 * std::f64::consts::LN_2).sqrt();
        assert!(
            (fwhm - 50.0 * GHZ).abs() / (50.0 * GHZ) < 0.10,
            "{}",
            fwhm / GHZ
        );
    }

    #[test]
    fn stationary_over_half_windows() {
        let grid = small_grid();
        let half = grid.n_points() / 2;
        let spec0 = SourceSpec::ifsfl(22e-3, 1540.7 * NM, 44.0 * GHZ, JonesVector::x(), 0);
        let mut first = 0.0;
        for seed in 0..100 {
            let f = make_ifsfl(
                &SourceSpec {
                    seed,
                    ..spec0.clone()
                },
                &grid,
            )
            .unwrap();
            first += f.ax[..half].iter().map(|a| a.norm_sqr()).sum::<f64>() / half as f64;
        }
        let first = first / 100.0;
        // Average power in the first half-window vs P (the half-window mean
        // estimates P; half the energy of the full window).
        assert!((first - 22e-3).abs() / 22e-3 < 0.10, "{first}");
    }

    #[test]
    fn bandwidth_too_large() {
        let grid = small_grid();
        let spec = SourceSpec::ifsfl(1e-3, 1540.7 * NM, 2e12, JonesVector::x(), 1);
        assert!(make_ifsfl(&spec, &grid).is_err());
    }

    #[test]
    fn flat_top_profile_power() {
        let grid = small_grid();
        let mut spec = SourceSpec::ifsfl(10e-3, 1540.7 * NM, 44.0 * GHZ, JonesVector::x(), 3);
        spec.shape = SpectralShape::FlatTop;
        let mean: f64 = (0..50)
            .map(|s| {
                make_ifsfl(
                    &SourceSpec {
                        seed: s,
                        ..spec.clone()
                    },
                    &grid,
                )
                .unwrap()
                .average_power()
            })
            .sum::<f64>()
            / 50.0;
        assert!((mean - 10e-3).abs() / 10e-3 < 0.05);
    }

    #[test]
    fn polarization_purity() {
        let grid = small_grid();
        let spec = SourceSpec::ifsfl(22e-3, 1540.7 * NM, 44.0 * GHZ, JonesVector::x(), 9);
        let f = make_ifsfl(&spec, &grid).unwrap();
        assert_eq!(f.power_y(), 0.0);
    }

    #[test]
    fn superposition() {
        let grid = small_grid();
        let a = make_cw(&SourceSpec::cw(2e-3, 1549.2 * NM, JonesVector::x()), &grid).unwrap();
        let b = make_cw(&SourceSpec::cw(2e-3, 1549.2 * NM, JonesVector::y()), &grid).unwrap();
        let zero = PolarizedField::zeros(&grid);
        assert_eq!(superpose(&[a.clone(), zero]).unwrap(), a);
        let s = superpose(&[a.clone(), b.clone()]).unwrap();
        assert!((s.average_power() - 4e-3).abs() < 1e-15);

        let other = TimeFrequencyGrid::new(1 << 13, 1.01e-9, 1545.0 * NM).unwrap();
        let c = PolarizedField::zeros(&other);
        assert!(matches!(superpose(&[a, c]), Err(Error::GridMismatch)));
    }

    #[test]
    fn three_lines_at_three_offsets() {
        let grid = small_grid();
        let j = JonesVector::x();
        let specs = [
            SourceSpec::cw(22e-3, 1540.7 * NM, j),
            SourceSpec::cw(15e-3, 1563.9 * NM, j),
            SourceSpec::cw(1e-3, 1549.2 * NM, j),
        ];
        let fields: Vec<_> = specs.iter().map(|s| make_cw(s, &grid).unwrap()).collect();
        let (px, _) = periodogram(&superpose(&fields).unwrap());
        let mut lit: Vec<usize> = (0..px.len())
            .filter(|&k| px[k] * grid.df() > 1e-9)
            .collect();
        lit.sort();
        let mut expected: Vec<usize> = specs
            .iter()
            .map(|s| carrier_bin(s.wavelength, &grid).unwrap())
            .collect();
        expected.sort();
        assert_eq!(lit, expected);
        for s in &specs {
            let k = carrier_bin(s.wavelength, &grid).unwrap();
            assert!((px[k] * grid.df() - s.power).abs() < 1e-15);
        }
    }
}
