//! Highly nonlinear fiber parameters and its linear dispersion model.
//!
//! Dispersion is `D(λ) = S·(λ − λ_ZDW)`. The group-velocity dispersion is
//! `β2 = −λ²D/(2πc)`, and the propagation constant used for phase
//! matching is `β2` integrated twice in angular frequency starting at the
//! zero-dispersion frequency. The integration constants drop out of every
//! energy-conserving four-wave combination.

use std::f64::consts::PI;

use serde::Serialize;

use crate::consts::{C, NM};
use crate::error::{Error, Result};

/// Wavelength window in which the linear dispersion model is trusted, m.
pub const DISPERSION_WINDOW: (f64, f64) = (1.4e-6, 1.7e-6);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberSpec {
    /// m
    pub length: f64,
    /// Zero-dispersion wavelength, m.
    pub zdw: f64,
    /// s/m³
    pub dispersion_slope: f64,
    /// 1/(W·m)
    pub gamma: f64,
    /// dB/km
    pub loss_db_per_km: f64,
    pub raman_fraction: f64,
}

/// Dispersion parameter and group-velocity dispersion at one wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    /// s/m²
    pub d: f64,
    /// s²/m
    pub beta2: f64,
}

impl FiberSpec {
    /// Builds a fiber from laboratory units: ZDW in nm, slope in
    /// ps/(km·nm²), γ in W⁻¹km⁻¹.
    pub fn from_lab_units(
        length_m: f64,
        zdw_nm: f64,
        slope_ps_per_km_nm2: f64,
        gamma_per_w_km: f64,
    ) -> Result<Self> {
        let fiber = Self {
            length: length_m,
            zdw: zdw_nm * NM,
            // ps/(km·nm²) → s/m³: 1e-12 / (1e3 · 1e-18)
            dispersion_slope: slope_ps_per_km_nm2 * 1e3,
            gamma: gamma_per_w_km * 1e-3,
            loss_db_per_km: 0.0,
            raman_fraction: 0.245,
        };
        fiber.validate()?;
        Ok(fiber)
    }

    /// 450 m HNLF, ZDW 1545 nm, slope 0.018 ps/(km·nm²), γ = 10 W⁻¹km⁻¹.
    pub fn lab_hnlf() -> Self {
        Self::from_lab_units(450.0, 1545.0, 0.018, 10.0).expect("lab fiber is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::domain(format!(
                "fiber length {} must be > 0",
                self.length
            )));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::domain("nonlinear coefficient must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.raman_fraction) {
            return Err(Error::domain(format!(
                "Raman fraction {} outside [0, 1)",
                self.raman_fraction
            )));
        }
        if !(self.zdw > 0.0) || !self.dispersion_slope.is_finite() {
            return Err(Error::domain("invalid dispersion parameters"));
        }
        if !(self.loss_db_per_km >= 0.0) {
            return Err(Error::domain("fiber loss must be >= 0 dB/km"));
        }
        Ok(())
    }

    /// Power attenuation coefficient, 1/m.
    pub fn alpha(&self) -> f64 {
        self.loss_db_per_km * std::f64::consts::LN_10 / 10.0 / 1e3
    }

    /// Effective nonlinear length; equals the physical length when lossless.
    pub fn effective_length(&self) -> f64 {
        let alpha = self.alpha();
        if alpha == 0.0 {
            self.length
        } else {
            -(-alpha * self.length).exp_m1() / alpha
        }
    }

    /// D and β2 at `lambda`; errors outside [`DISPERSION_WINDOW`].
    pub fn dispersion_at(&self, lambda: f64) -> Result<Dispersion> {
        check_window(lambda)?;
        Ok(self.dispersion_unchecked(lambda))
    }

    fn dispersion_unchecked(&self, lambda: f64) -> Dispersion {
        let d = self.dispersion_slope * (lambda - self.zdw);
        Dispersion {
            d,
            beta2: -lambda * lambda * d / (2.0 * PI * C),
        }
    }

    /// β2 at an optical frequency, without window checks.
    pub fn beta2_at_frequency(&self, frequency: f64) -> f64 {
        self.dispersion_unchecked(C / frequency).beta2
    }

    /// β3 = dβ2/dω at an optical frequency, s³/m.
    pub fn beta3_at_frequency(&self, frequency: f64) -> f64 {
        let lambda = C / frequency;
        let d = self.dispersion_slope * (lambda - self.zdw);
        let u = 2.0 * PI * C;
        lambda * lambda * (2.0 * lambda * d + lambda * lambda * self.dispersion_slope) / (u * u)
    }

    /// Propagation constant relative to the ZDW, with β(ω_ZDW) and
    /// β1(ω_ZDW) removed: `∫_{ω_z}^{ω} (ω − x) β2(x) dx`, in closed form.
    pub fn relative_beta(&self, frequency: f64) -> f64 {
        let u = 2.0 * PI * C;
        let omega_z = u / self.zdw;
        let eps = 2.0 * PI * frequency / omega_z - 1.0;
        let shape = eps - eps.ln_1p() - eps * eps / (2.0 * (1.0 + eps));
        self.dispersion_slope * u * u / omega_z * shape
    }
}

impl Default for FiberSpec {
    fn default() -> Self {
        Self::lab_hnlf()
    }
}

pub(crate) fn check_window(lambda: f64) -> Result<()> {
    let (lo, hi) = DISPERSION_WINDOW;
    if !(lambda > lo && lambda < hi) {
        return Err(Error::domain(format!(
            "wavelength {:.3} nm outside the dispersion model window ({:.0}–{:.0} nm)",
            lambda / NM,
            lo / NM,
            hi / NM
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_zdw() {
        let f = FiberSpec::lab_hnlf();
        let d = f.dispersion_at(1545.0 * NM).unwrap();
        assert_eq!(d.d, 0.0);
        assert_eq!(d.beta2, 0.0);
    }

    #[test]
    fn signal_and_idler_dispersion() {
        let f = FiberSpec::lab_hnlf();
        // Hand evaluation: D = 0.018 · 4.2 ps/(nm·km); β2 = −λ²D/(2πc).
        let d = f.dispersion_at(1549.2 * NM).unwrap();
        let d_ps_nm_km = d.d * 1e6;
        assert!((d_ps_nm_km - 0.0756).abs() < 1e-12);
        let beta2_ps2_km = d.beta2 * 1e27;
        let expected = -(1549.2e-9f64).powi(2) * 0.0756e-6 / (2.0 * PI * C) * 1e27;
        assert!((beta2_ps2_km - expected).abs() < 1e-12);
        assert!((beta2_ps2_km + 0.0963).abs() < 5e-4);

        let d = f.dispersion_at(1526.43 * NM).unwrap();
        assert!((d.d * 1e6 + 0.334).abs() < 1e-3);
    }

    #[test]
    fn outside_window_is_domain_error() {
        let f = FiberSpec::lab_hnlf();
        assert!(matches!(f.dispersion_at(1.3e-6), Err(Error::Domain(_))));
        assert!(matches!(f.dispersion_at(1.8e-6), Err(Error::Domain(_))));
    }

    #[test]
    fn linear_in_wavelength() {
        let f = FiberSpec::lab_hnlf();
        let (l1, l2) = (1501.3 * NM, 1620.9 * NM);
        let d1 = f.dispersion_at(l1).unwrap().d;
        let d2 = f.dispersion_at(l2).unwrap().d;
        let dm = f.dispersion_at(0.5 * (l1 + l2)).unwrap().d;
        assert!((d1 + d2 - 2.0 * dm).abs() < 1e-18);
    }

    #[test]
    fn beta3_matches_finite_difference() {
        let f = FiberSpec::lab_hnlf();
        let nu = C / (1552.0 * NM);
        let h = 1e9;
        let fd =
            (f.beta2_at_frequency(nu + h) - f.beta2_at_frequency(nu - h)) / (2.0 * PI * 2.0 * h);
        let b3 = f.beta3_at_frequency(nu);
        assert!((fd - b3).abs() / b3.abs() < 1e-6);
        // ≈ 0.029 ps³/km at the ZDW
        let b3z = f.beta3_at_frequency(C / f.zdw) * 1e39;
        assert!((b3z - 0.0289).abs() < 5e-4, "{b3z}");
    }

    #[test]
    fn effective_length() {
        let mut f = FiberSpec::lab_hnlf();
        assert_eq!(f.effective_length(), 450.0);
        f.loss_db_per_km = 1.0;
        let a = f.alpha();
        assert!((f.effective_length() - (1.0 - (-a * 450.0).exp()) / a).abs() < 1e-9);
        assert!(f.effective_length() < 450.0);
    }

    #[test]
    fn validation() {
        assert!(FiberSpec::from_lab_units(0.0, 1545.0, 0.018, 10.0).is_err());
        assert!(FiberSpec::from_lab_units(450.0, 1545.0, 0.018, -1.0).is_err());
        let mut f = FiberSpec::lab_hnlf();
        f.raman_fraction = 1.0;
        assert!(f.validate().is_err());
    }
}
