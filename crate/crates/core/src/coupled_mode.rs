//! Two-mode coupled-wave model of Bragg scattering and degenerate FWM with
//! undepleted pumps.
//!
//! The idler amplitude obeys `dB_i/dz = iκ B_s e^{iΔβz}` (and its partner
//! equation for the signal), whose solution gives
//! `η = (κ/g)² sin²(gL)` with `g = √(κ² + (Δβ/2)²)`. Polarization enters
//! only through the coupling factors derived from the Jones vectors.

use serde::Serialize;

use crate::consts::{frequency_of, linear_to_db};
use crate::error::{Error, Result};
use crate::fiber::FiberSpec;
use crate::polarization::{JonesVector, PolarizationCase};
use crate::ssfm::AveragedSpectrum;
use crate::wavelength::{
    bs_idler_wavelength, delta_beta_bs, delta_beta_dfwm, dfwm_idler_wavelength,
};

/// Polarization coupling of one pump/signal arrangement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coupling {
    /// Multiplies κ0 = 2γ√(P1·P2) for Bragg scattering.
    pub bs_factor: f64,
    /// Multiplies γ·P1 for degenerate FWM driven by P1.
    pub dfwm_factor: f64,
    /// Polarization of the generated BS idler, if any.
    #[serde(skip)]
    pub idler_jones: Option<JonesVector>,
}

impl Coupling {
    /// Couplings from the Manakov nonlinearity `(A†A)A`.
    ///
    /// The BS idler is driven by `(j2†·js) j1 + (j2†·j1) js`; its norm is 2
    /// when all three waves are co-polarized. The P1-degenerate idler is
    /// driven by `(js†·j1) j1`.
    pub fn from_jones(p1: &JonesVector, p2: &JonesVector, s: &JonesVector) -> Self {
        let a = p2.inner(s);
        let b = p2.inner(p1);
        let vx = a * p1.cx + b * s.cx;
        let vy = a * p1.cy + b * s.cy;
        let norm = (vx.norm_sqr() + vy.norm_sqr()).sqrt();
        let idler_jones = if norm > 1e-12 {
            JonesVector::new(vx, vy).ok()
        } else {
            None
        };
        Self {
            bs_factor: clean(0.5 * norm),
            dfwm_factor: clean(s.inner(p1).norm()),
            idler_jones,
        }
    }

    pub fn dfwm_active(&self) -> bool {
        self.dfwm_factor > 0.0
    }

    pub fn bs_active(&self) -> bool {
        self.bs_factor > 0.0
    }
}

/// Snap round-off residue to exact 0, ½ and 1.
fn clean(x: f64) -> f64 {
    for exact in [0.0, 0.5, 1.0] {
        if (x - exact).abs() < 1e-12 {
            return exact;
        }
    }
    x
}

/// Couplings of the four reference arrangements.
#[derive(Debug, Clone, Serialize)]
pub struct CouplingTable {
    pub rows: Vec<(PolarizationCase, Coupling)>,
}

impl CouplingTable {
    pub fn standard() -> Self {
        let rows = PolarizationCase::ALL
            .iter()
            .map(|&c| (c, Self::for_case(c)))
            .collect();
        Self { rows }
    }

    pub fn for_case(case: PolarizationCase) -> Coupling {
        let (p1, p2, s) = case.jones();
        Coupling::from_jones(&p1, &p2, &s)
    }
}

/// Idler photon conversion after `length` for coupling `kappa` and
/// mismatch `delta_beta`.
///
/// Written as `(κL)²·sinc²(gL)` so the κ → 0 and g → 0 limits are exact.
pub fn conversion(kappa: f64, delta_beta: f64, length: f64) -> f64 {
    let g = (kappa * kappa + 0.25 * delta_beta * delta_beta).sqrt();
    let x = g * length;
    let sinc = if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    };
    ((kappa * length) * sinc).powi(2).clamp(0.0, 1.0)
}

/// Signal and idler photon fractions at position `z` for a unit input
/// signal, each evaluated from its own closed form.
pub fn two_mode_fractions(kappa: f64, delta_beta: f64, z: f64) -> (f64, f64) {
    let g = (kappa * kappa + 0.25 * delta_beta * delta_beta).sqrt();
    if g == 0.0 {
        return (1.0, 0.0);
    }
    let (s, c) = (g * z).sin_cos();
    let signal = c * c + (0.5 * delta_beta / g).powi(2) * s * s;
    let idler = (kappa / g).powi(2) * s * s;
    (signal, idler)
}

/// Nonlinear contribution to the BS mismatch from self- and cross-phase
/// modulation of co-polarized pumps, γ(P1 − P2).
pub fn xpm_mismatch(p1: f64, p2: f64, gamma: f64) -> f64 {
    gamma * (p1 - p2)
}

/// Bragg-scattering conversion efficiency (idler photons out per signal
/// photon in).
pub fn bs_efficiency(
    p1: f64,
    p2: f64,
    gamma: f64,
    length: f64,
    delta_beta: f64,
    case: PolarizationCase,
) -> f64 {
    let c = CouplingTable::for_case(case);
    let kappa = c.bs_factor * 2.0 * gamma * (p1.max(0.0) * p2.max(0.0)).sqrt();
    conversion(kappa, delta_beta, length)
}

/// Degenerate FWM efficiency driven by P1 alone.
pub fn dfwm_efficiency(
    p1: f64,
    gamma: f64,
    length: f64,
    delta_beta: f64,
    case: PolarizationCase,
) -> f64 {
    let c = CouplingTable::for_case(case);
    let kappa = c.dfwm_factor * gamma * p1.max(0.0);
    conversion(kappa, delta_beta, length)
}

/// Pumps and signal of a BS configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BsSetup {
    pub p1_power: f64,
    pub p2_power: f64,
    pub lambda_p1: f64,
    pub lambda_p2: f64,
    pub lambda_s: f64,
    /// Add the pump-induced nonlinear mismatch.
    pub include_xpm: bool,
}

impl BsSetup {
    /// 22 mW at 1540.7 nm, 15 mW at 1563.9 nm, signal at 1549.2 nm.
    pub fn lab() -> Self {
        Self {
            p1_power: 0.022,
            p2_power: 0.015,
            lambda_p1: 1540.7e-9,
            lambda_p2: 1563.9e-9,
            lambda_s: 1549.2e-9,
            include_xpm: false,
        }
    }

    pub fn idler_wavelength(&self) -> Result<f64> {
        bs_idler_wavelength(self.lambda_s, self.lambda_p1, self.lambda_p2)
    }

    pub fn dfwm_idler_wavelength(&self) -> Result<f64> {
        dfwm_idler_wavelength(self.lambda_s, self.lambda_p1)
    }

    pub fn delta_beta(&self, fiber: &FiberSpec) -> Result<f64> {
        let lin = delta_beta_bs(self.lambda_s, self.lambda_p1, self.lambda_p2, fiber)?;
        Ok(if self.include_xpm {
            lin + xpm_mismatch(self.p1_power, self.p2_power, fiber.gamma)
        } else {
            lin
        })
    }

    pub fn bs_efficiency(&self, fiber: &FiberSpec, case: PolarizationCase) -> Result<f64> {
        let db = self.delta_beta(fiber)?;
        Ok(bs_efficiency(
            self.p1_power,
            self.p2_power,
            fiber.gamma,
            fiber.length,
            db,
            case,
        ))
    }

    pub fn dfwm_efficiency(&self, fiber: &FiberSpec, case: PolarizationCase) -> Result<f64> {
        let db = delta_beta_dfwm(self.lambda_s, self.lambda_p1, fiber)?;
        Ok(dfwm_efficiency(
            self.p1_power,
            fiber.gamma,
            fiber.length,
            db,
            case,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda_s: f64,
    pub lambda_i: f64,
    pub delta_beta: f64,
    pub eta: f64,
    pub eta_db: f64,
    pub case: PolarizationCase,
}

/// Evaluates the BS efficiency for each signal wavelength in order.
pub fn efficiency_sweep(
    signal_wavelengths: &[f64],
    setup: &BsSetup,
    fiber: &FiberSpec,
    case: PolarizationCase,
) -> Result<Vec<SweepRow>> {
    signal_wavelengths
        .iter()
        .map(|&lambda_s| {
            let point = BsSetup { lambda_s, ..*setup };
            let lambda_i = point.idler_wavelength()?;
            let delta_beta = point.delta_beta(fiber)?;
            let eta = bs_efficiency(
                point.p1_power,
                point.p2_power,
                fiber.gamma,
                fiber.length,
                delta_beta,
                case,
            );
            Ok(SweepRow {
                lambda_s,
                lambda_i,
                delta_beta,
                eta,
                eta_db: linear_to_db(eta),
                case,
            })
        })
        .collect()
}

/// Integration width around each line when reading efficiencies off a
/// simulated spectrum.
pub const CROSSCHECK_BAND: f64 = 200e9;

/// Efficiency read from a propagated spectrum: output idler photon flux in
/// a band around the BS idler over the input signal photon flux.
pub fn ssfm_efficiency(
    spectrum: &AveragedSpectrum,
    setup: &BsSetup,
    signal_power: f64,
) -> Result<f64> {
    if !(signal_power > 0.0) {
        return Err(Error::domain("cross-check needs a nonzero input signal"));
    }
    let lambda_i = setup.idler_wavelength()?;
    let p_idler = spectrum.band_power(frequency_of(lambda_i), CROSSCHECK_BAND);
    Ok(p_idler * lambda_i / (signal_power * setup.lambda_s))
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheckRow {
    pub case: PolarizationCase,
    pub eta_cm: f64,
    pub eta_ssfm: f64,
    /// η_ssfm − η_cm in dB (NaN when the coupled-mode value is zero).
    pub difference_db: f64,
}

/// Compares the coupled-mode efficiency with SSFM spectra of the same
/// setup, one row per supplied case.
pub fn crosscheck_ssfm(
    spectra: &[(PolarizationCase, AveragedSpectrum)],
    setup: &BsSetup,
    fiber: &FiberSpec,
    signal_power: f64,
) -> Result<Vec<CrossCheckRow>> {
    spectra
        .iter()
        .map(|(case, spectrum)| {
            let eta_cm = setup.bs_efficiency(fiber, *case)?;
            let eta_ssfm = ssfm_efficiency(spectrum, setup, signal_power)?;
            let difference_db = if eta_cm > 0.0 {
                linear_to_db(eta_ssfm) - linear_to_db(eta_cm)
            } else {
                f64::NAN
            };
            Ok(CrossCheckRow {
                case: *case,
                eta_cm,
                eta_ssfm,
                difference_db,
            })
        })
        .collect()
}

/// Complex BS idler drive direction for arbitrary Jones vectors, exposed
/// for analyzer alignment.
pub fn idler_polarization(p1: &JonesVector, p2: &JonesVector, s: &JonesVector) -> JonesVector {
    Coupling::from_jones(p1, p2, s).idler_jones.unwrap_or(*s)
}
