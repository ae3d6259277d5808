//! Frequency bookkeeping of the four-wave mixing products and their linear
//! phase mismatch. All arithmetic happens on absolute optical frequencies.

use crate::consts::{frequency_of, wavelength_of};
use crate::error::{Error, Result};
use crate::fiber::{check_window, FiberSpec};

fn checked_wavelength(freq: f64) -> Result<f64> {
    if !(freq > 0.0) || !freq.is_finite() {
        return Err(Error::domain(format!(
            "generated frequency {freq:e} Hz is not positive"
        )));
    }
    Ok(wavelength_of(freq))
}

fn check_positive(lambdas: &[f64]) -> Result<()> {
    if lambdas.iter().all(|l| *l > 0.0 && l.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain("wavelengths must be positive"))
    }
}

/// Bragg-scattering idler, ν_i = ν_s + ν_p1 − ν_p2.
pub fn bs_idler_wavelength(lambda_s: f64, lambda_p1: f64, lambda_p2: f64) -> Result<f64> {
    check_positive(&[lambda_s, lambda_p1, lambda_p2])?;
    checked_wavelength(frequency_of(lambda_s) + frequency_of(lambda_p1) - frequency_of(lambda_p2))
}

/// Inverse of [`bs_idler_wavelength`]: the signal that converts to `lambda_i`.
pub fn bs_signal_wavelength(lambda_i: f64, lambda_p1: f64, lambda_p2: f64) -> Result<f64> {
    check_positive(&[lambda_i, lambda_p1, lambda_p2])?;
    checked_wavelength(frequency_of(lambda_i) - frequency_of(lambda_p1) + frequency_of(lambda_p2))
}

/// Degenerate-pump idler, ν_i = 2ν_p − ν_s.
pub fn dfwm_idler_wavelength(lambda_s: f64, lambda_p: f64) -> Result<f64> {
    check_positive(&[lambda_s, lambda_p])?;
    checked_wavelength(2.0 * frequency_of(lambda_p) - frequency_of(lambda_s))
}

/// Linear phase mismatch of Bragg scattering,
/// Δβ = β(ω_i) + β(ω_p2) − β(ω_s) − β(ω_p1), 1/m.
pub fn delta_beta_bs(
    lambda_s: f64,
    lambda_p1: f64,
    lambda_p2: f64,
    fiber: &FiberSpec,
) -> Result<f64> {
    let lambda_i = bs_idler_wavelength(lambda_s, lambda_p1, lambda_p2)?;
    for l in [lambda_s, lambda_p1, lambda_p2, lambda_i] {
        check_window(l)?;
    }
    let b = |l: f64| fiber.relative_beta(frequency_of(l));
    Ok(b(lambda_i) + b(lambda_p2) - b(lambda_s) - b(lambda_p1))
}

/// Linear phase mismatch of degenerate FWM, Δβ = β(ω_i) + β(ω_s) − 2β(ω_p).
pub fn delta_beta_dfwm(lambda_s: f64, lambda_p: f64, fiber: &FiberSpec) -> Result<f64> {
    let lambda_i = dfwm_idler_wavelength(lambda_s, lambda_p)?;
    for l in [lambda_s, lambda_p, lambda_i] {
        check_window(l)?;
    }
    let b = |l: f64| fiber.relative_beta(frequency_of(l));
    Ok(b(lambda_i) + b(lambda_s) - 2.0 * b(lambda_p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::{C, NM};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const S: f64 = 1549.2 * NM;
    const P1: f64 = 1540.7 * NM;
    const P2: f64 = 1563.9 * NM;

    /// Independent oracle: β(ω) by adaptive Simpson quadrature of
    /// (ω − x)·β2(x) from the zero-dispersion frequency.
    fn beta_by_quadrature(fiber: &FiberSpec, freq: f64) -> f64 {
        let wz = 2.0 * PI * C / fiber.zdw;
        let w = 2.0 * PI * freq;
        let f = |x: f64| (w - x) * fiber.beta2_at_frequency(x / (2.0 * PI));
        let n = 20_000;
        let h = (w - wz) / n as f64;
        let mut acc = f(wz) + f(w);
        for k in 1..n {
            let x = wz + k as f64 * h;
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * h / 3.0
    }

    #[test]
    fn bs_idler_of_the_lab_quartet() {
        let li = bs_idler_wavelength(S, P1, P2).unwrap();
        assert!((li / NM - 1526.43).abs() < 0.01, "{}", li / NM);
    }

    #[test]
    fn bs_idler_degenerate_pumps_and_swapped() {
        assert!((bs_idler_wavelength(S, P1, P1).unwrap() - S).abs() < 1e-20);
        // Oracle: direct ν arithmetic, 193.5144 + 191.6944 − 194.5793 THz.
        let nu = C / S + C / P2 - C / P1;
        let li = bs_idler_wavelength(S, P2, P1).unwrap();
        assert_eq!(li, C / nu);
        assert!((li / NM - 1572.6586).abs() < 1e-3, "{}", li / NM);
    }

    #[test]
    fn dfwm_idlers() {
        let li = dfwm_idler_wavelength(S, P1).unwrap();
        assert!((li / NM - 1532.3).abs() < 0.1);
        assert!((dfwm_idler_wavelength(P1, P1).unwrap() - P1).abs() < 1e-20);
        let li = dfwm_idler_wavelength(S, P2).unwrap();
        assert!((li / NM - 1578.9).abs() < 0.05, "{}", li / NM);
    }

    #[test]
    fn negative_generated_frequency_is_domain_error() {
        // ν_s + ν_p1 − ν_p2 < 0 when P2 sits far above the others in frequency.
        let r = bs_idler_wavelength(1550.0 * NM, 1550.0 * NM, 500.0 * NM);
        assert!(matches!(r, Err(Error::Domain(_))));
        assert!(dfwm_idler_wavelength(400.0 * NM, 1600.0 * NM).is_err());
        assert!(bs_idler_wavelength(-1.0, P1, P2).is_err());
    }

    #[test]
    fn closed_form_beta_matches_quadrature() {
        let fiber = FiberSpec::lab_hnlf();
        for l in [1500.0, 1526.43, 1540.7, 1549.2, 1563.9, 1620.0] {
            let nu = C / (l * NM);
            let a = fiber.relative_beta(nu);
            let b = beta_by_quadrature(&fiber, nu);
            assert!(
                (a - b).abs() <= 1e-9 * b.abs().max(1e-12),
                "{l}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn lab_quartet_mismatch_is_small() {
        let fiber = FiberSpec::lab_hnlf();
        let db = delta_beta_bs(S, P1, P2, &fiber).unwrap();
        // Oracle: same combination from quadrature.
        let li = bs_idler_wavelength(S, P1, P2).unwrap();
        let q = |l: f64| beta_by_quadrature(&fiber, C / l);
        let oracle = q(li) + q(P2) - q(S) - q(P1);
        assert!((db - oracle).abs() < 1e-12, "{db} vs {oracle}");
        // Regression constant (quadrature oracle): −2.7294e-4 1/m.
        assert!((db + 2.729_388_8e-4).abs() < 1e-10, "{db}");
        assert!(db.abs() * fiber.length < PI);

        let dd = delta_beta_dfwm(S, P1, &fiber).unwrap();
        assert!((dd - 4.365_382_8e-3).abs() < 1e-9, "{dd}");
    }

    #[test]
    fn degenerate_and_dispersionless() {
        let mut fiber = FiberSpec::lab_hnlf();
        assert_eq!(delta_beta_bs(S, S, S, &fiber).unwrap(), 0.0);
        fiber.dispersion_slope = 0.0;
        assert_eq!(delta_beta_bs(S, P1, P2, &fiber).unwrap(), 0.0);
    }

    #[test]
    fn integration_constants_cancel() {
        // Adding β0 + β1·(ω − ω_z) to every wave leaves Δβ unchanged
        // because Σ±ω = 0 for an energy-conserving quartet.
        let li = bs_idler_wavelength(S, P1, P2).unwrap();
        let w = |l: f64| 2.0 * PI * C / l;
        let net = w(li) + w(P2) - w(S) - w(P1);
        assert!(net.abs() / w(S) < 1e-14);
    }

    proptest! {
        #[test]
        fn idler_inverse_is_identity(s in 1450.0f64..1650.0, p1 in 1500.0f64..1600.0, p2 in 1500.0f64..1600.0) {
            let (s, p1, p2) = (s * NM, p1 * NM, p2 * NM);
            let li = bs_idler_wavelength(s, p1, p2).unwrap();
            let back = bs_signal_wavelength(li, p1, p2).unwrap();
            prop_assert!(((back - s) / s).abs() < 1e-12);
        }

        #[test]
        fn mismatch_antisymmetry(s in 1500.0f64..1600.0, p1 in 1520.0f64..1580.0, p2 in 1520.0f64..1580.0) {
            let fiber = FiberSpec::lab_hnlf();
            let (s, p1, p2) = (s * NM, p1 * NM, p2 * NM);
            let li = bs_idler_wavelength(s, p1, p2).unwrap();
            prop_assume!(li > 1.42e-6 && li < 1.68e-6);
            let fwd = delta_beta_bs(s, p1, p2, &fiber).unwrap();
            let rev = delta_beta_bs(li, p2, p1, &fiber).unwrap();
            prop_assert!((fwd + rev).abs() <= 1e-9 * fwd.abs().max(1e-9));
        }

        #[test]
        fn zero_slope_means_zero_mismatch(s in 1500.0f64..1600.0, p1 in 1520.0f64..1580.0, p2 in 1520.0f64..1580.0) {
            let mut fiber = FiberSpec::lab_hnlf();
            fiber.dispersion_slope = 0.0;
            let (s, p1, p2) = (s * NM, p1 * NM, p2 * NM);
            let li = bs_idler_wavelength(s, p1, p2).unwrap();
            prop_assume!(li > 1.42e-6 && li < 1.68e-6);
            prop_assert_eq!(delta_beta_bs(s, p1, p2, &fiber).unwrap(), 0.0);
        }
    }
}
