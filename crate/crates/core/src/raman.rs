//! Anisotropic Raman response of silica and the gain, thermal and
//! spontaneous-emission budgets built on it.
//!
//! The response splits into an isotropic channel `R_a = f_a·h_a` and an
//! anisotropic channel `R_b = f_b·h_b + f_c·h_a`. A co-polarized signal sees
//! gain from `R_a + R_b`; an orthogonal one sees `R_b / 2`.
//!
//! Detuning convention: `Ω = ω_pump − ω_wave`. Positive Ω is the Stokes
//! side (the wave below the pump gains energy), negative Ω anti-Stokes.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::consts::{HBAR, KB};
use crate::error::{Error, Result};
use crate::grid::TimeFrequencyGrid;

/// Temporal shape of the anisotropic kernel `h_b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AnisotropicKernel {
    /// `h_b(t) = exp(−t/τ_b)/τ_b`, a Debye relaxation.
    Relaxation,
    /// `h_b(t) = (2τ_b − t)/τ_b² · exp(−t/τ_b)`.
    Intermediate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RamanParams {
    pub f_r: f64,
    pub f_a: f64,
    pub f_b: f64,
    pub f_c: f64,
    /// s
    pub tau1: f64,
    /// s
    pub tau2: f64,
    /// s
    pub tau_b: f64,
    pub kernel: AnisotropicKernel,
}

impl Default for RamanParams {
    fn default() -> Self {
        Self {
            f_r: 0.245,
            f_a: 0.69,
            f_b: 0.27,
            f_c: 0.04,
            tau1: 12.2e-15,
            tau2: 32e-15,
            tau_b: 36e-15,
            kernel: AnisotropicKernel::Relaxation,
        }
    }
}

impl RamanParams {
    /// The intermediate-broadening parameter set with the
    /// `(2τ_b − t)` anisotropic kernel (τ_b = 96 fs).
    pub fn intermediate() -> Self {
        Self {
            f_r: 0.245,
            f_a: 0.75,
            f_b: 0.21,
            f_c: 0.04,
            tau1: 12.2e-15,
            tau2: 32e-15,
            tau_b: 96e-15,
            kernel: AnisotropicKernel::Intermediate,
        }
    }
}

/// Normalized response functions, tabulated on a fine time axis, with
/// closed-form transfer functions `H(ω) = ∫h(t)·exp(iωt) dt`.
#[derive(Debug, Clone)]
pub struct RamanResponse {
    pub params: RamanParams,
    /// Sample spacing of the tables, s.
    pub table_dt: f64,
    pub h_a: Vec<f64>,
    pub h_b: Vec<f64>,
}

fn simpson(samples: &[f64], dt: f64) -> f64 {
    let n = samples.len();
    let m = if n.is_multiple_of(2) { n - 1 } else { n };
    let mut acc = samples[0] + samples[m - 1];
    for (k, s) in samples.iter().enumerate().take(m - 1).skip(1) {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * s;
    }
    acc * dt / 3.0
}

impl RamanResponse {
    pub fn build(params: RamanParams) -> Result<Self> {
        let p = &params;
        if !(p.tau1 > 0.0 && p.tau2 > 0.0 && p.tau_b > 0.0) {
            return Err(Error::domain("Raman time constants must be positive"));
        }
        if [p.f_a, p.f_b, p.f_c].iter().any(|f| !(*f >= 0.0)) || !(0.0..1.0).contains(&p.f_r) {
            return Err(Error::domain(
                "Raman fractions must be non-negative, f_R < 1",
            ));
        }
        if ((p.f_a + p.f_b + p.f_c) - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "Raman fractions f_a + f_b + f_c = {} must sum to 1",
                p.f_a + p.f_b + p.f_c
            )));
        }
        let longest = p.tau2.max(p.tau_b);
        let table_dt = p.tau1.min(p.tau2).min(p.tau_b) / 400.0;
        let n = ((60.0 * longest / table_dt).ceil() as usize) | 1;
        let t = |k: usize| k as f64 * table_dt;
        let resp = Self {
            h_a: (0..n).map(|k| ha_time(p, t(k))).collect(),
            h_b: (0..n).map(|k| hb_time(p, t(k))).collect(),
            table_dt,
            params,
        };
        for (name, h) in [("h_a", &resp.h_a), ("h_b", &resp.h_b)] {
            let area = simpson(h, table_dt);
            if !((area - 1.0).abs() < 1e-6) {
                return Err(Error::domain(format!("{name} integrates to {area}, not 1")));
            }
        }
        Ok(resp)
    }

    /// Numerical areas of the tabulated responses.
    pub fn areas(&self) -> (f64, f64) {
        (
            simpson(&self.h_a, self.table_dt),
            simpson(&self.h_b, self.table_dt),
        )
    }

    pub fn h_a_transform(&self, omega: f64) -> Complex64 {
        let p = &self.params;
        let amp = (p.tau1 * p.tau1 + p.tau2 * p.tau2) / (p.tau1 * p.tau2 * p.tau2);
        let a = Complex64::new(1.0 / p.tau2, -omega);
        amp / p.tau1 / (a * a + 1.0 / (p.tau1 * p.tau1))
    }

    pub fn h_b_transform(&self, omega: f64) -> Complex64 {
        let p = &self.params;
        let one_minus_ix = Complex64::new(1.0, -omega * p.tau_b);
        match p.kernel {
            AnisotropicKernel::Relaxation => 1.0 / one_minus_ix,
            AnisotropicKernel::Intermediate => {
                Complex64::new(1.0, -2.0 * omega * p.tau_b) / (one_minus_ix * one_minus_ix)
            }
        }
    }

    /// Isotropic channel R̃_a(ω).
    pub fn r_a(&self, omega: f64) -> Complex64 {
        self.params.f_a * self.h_a_transform(omega)
    }

    /// Anisotropic channel R̃_b(ω).
    pub fn r_b(&self, omega: f64) -> Complex64 {
        self.params.f_b * self.h_b_transform(omega) + self.params.f_c * self.h_a_transform(omega)
    }

    /// Channel transfer functions sampled on a simulation grid (FFT order).
    pub fn on_grid(&self, grid: &TimeFrequencyGrid) -> GridKernels {
        let w = grid.angular_offsets();
        let mut k = GridKernels {
            r_a: w.iter().map(|&w| self.r_a(w)).collect(),
            r_b: w.iter().map(|&w| self.r_b(w)).collect(),
        };
        // The Nyquist bin has no mirror partner; keep it real so real
        // intensities convolve to real potentials.
        let nyq = grid.n_points() / 2;
        k.r_a[nyq].im = 0.0;
        k.r_b[nyq].im = 0.0;
        k
    }
}

fn ha_time(p: &RamanParams, t: f64) -> f64 {
    let amp = (p.tau1 * p.tau1 + p.tau2 * p.tau2) / (p.tau1 * p.tau2 * p.tau2);
    amp * (-t / p.tau2).exp() * (t / p.tau1).sin()
}

fn hb_time(p: &RamanParams, t: f64) -> f64 {
    let tb = p.tau_b;
    match p.kernel {
        AnisotropicKernel::Relaxation => (-t / tb).exp() / tb,
        AnisotropicKernel::Intermediate => (2.0 * tb - t) / (tb * tb) * (-t / tb).exp(),
    }
}

/// R̃_a and R̃_b on grid frequencies.
#[derive(Debug, Clone)]
pub struct GridKernels {
    pub r_a: Vec<Complex64>,
    pub r_b: Vec<Complex64>,
}

/// Polarization of a wave relative to the pump driving it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RamanPolarization {
    Parallel,
    Perpendicular,
    /// Power overlap |⟨wave|pump⟩|² ∈ [0, 1].
    Overlap(f64),
}

impl RamanPolarization {
    fn overlap(self) -> f64 {
        match self {
            Self::Parallel => 1.0,
            Self::Perpendicular => 0.0,
            Self::Overlap(o) => o.clamp(0.0, 1.0),
        }
    }
}

/// Raman gain model: the response plus its absolute normalization.
///
/// Gain coefficients are `r(Ω) = norm · Im R̃(Ω)` in 1/(W·m), with
/// `norm = 2γ·f_R` unless overridden by a peak-gain value.
#[derive(Debug, Clone)]
pub struct RamanGain {
    pub response: RamanResponse,
    pub norm: f64,
}

impl RamanGain {
    pub fn new(response: RamanResponse, gamma: f64) -> Self {
        let norm = 2.0 * gamma * response.params.f_r;
        Self { response, norm }
    }

    /// Rescales so the parallel gain peaks at `peak` 1/(W·m).
    pub fn with_peak_gain(mut self, peak: f64) -> Self {
        let (_, current) = self.parallel_peak();
        self.norm *= peak / current;
        self
    }

    /// Location (Hz) and value of the parallel-gain maximum, 0–40 THz.
    pub fn parallel_peak(&self) -> (f64, f64) {
        let mut best = (0.0, f64::MIN);
        for k in 1..=40_000 {
            let f = k as f64 * 1e9;
            let g = self.r_parallel(2.0 * PI * f);
            if g > best.1 {
                best = (f, g);
            }
        }
        best
    }

    pub fn r_isotropic(&self, omega: f64) -> f64 {
        self.norm * self.response.r_a(omega).im
    }

    pub fn r_anisotropic(&self, omega: f64) -> f64 {
        self.norm * self.response.r_b(omega).im
    }

    pub fn r_parallel(&self, omega: f64) -> f64 {
        self.r_isotropic(omega) + self.r_anisotropic(omega)
    }

    pub fn r_perpendicular(&self, omega: f64) -> f64 {
        0.5 * self.r_anisotropic(omega)
    }

    pub fn r(&self, omega: f64, pol: RamanPolarization) -> f64 {
        let o = pol.overlap();
        o * self.r_parallel(omega) + (1.0 - o) * self.r_perpendicular(omega)
    }

    /// Gain spectra on a set of detunings (Hz, pump − wave).
    pub fn gain_curves(&self, pump_power: f64, detunings_hz: &[f64]) -> RamanGainCurve {
        let w = |f: f64| 2.0 * PI * f;
        let r_a: Vec<f64> = detunings_hz
            .iter()
            .map(|&f| self.r_isotropic(w(f)))
            .collect();
        let r_b: Vec<f64> = detunings_hz
            .iter()
            .map(|&f| self.r_anisotropic(w(f)))
            .collect();
        let r_parallel = r_a.iter().zip(&r_b).map(|(a, b)| a + b).collect();
        let r_perpendicular = r_b.iter().map(|b| 0.5 * b).collect();
        RamanGainCurve {
            detuning_hz: detunings_hz.to_vec(),
            pump_power,
            r_a,
            r_b,
            r_parallel,
            r_perpendicular,
        }
    }

    /// Signal power after `l_eff` of undepleted pump:
    /// `P_s · exp(r(Ω)·P_p·L_eff)`, a gain on the Stokes side.
    pub fn stimulated_exchange(
        &self,
        signal_power: f64,
        pump_power: f64,
        detuning: f64,
        pol: RamanPolarization,
        l_eff: f64,
    ) -> f64 {
        signal_power * (self.r(detuning, pol) * pump_power * l_eff).exp()
    }

    /// Spontaneous Raman photon flux (photons/s) in one polarization mode
    /// of bandwidth `bandwidth` Hz at detuning `detuning` rad/s, in the
    /// low-gain limit: `|r|·P·L_eff·B·(n_th + 1)` Stokes, `·n_th` anti-Stokes.
    pub fn spontaneous_flux(
        &self,
        pump_power: f64,
        l_eff: f64,
        detuning: f64,
        bandwidth: f64,
        pol: RamanPolarization,
        temperature: f64,
    ) -> Result<f64> {
        if detuning == 0.0 || !detuning.is_finite() {
            return Err(Error::domain(
                "spontaneous Raman flux diverges at zero detuning",
            ));
        }
        if !(bandwidth > 0.0) {
            return Err(Error::domain("detection bandwidth must be positive"));
        }
        let base = self.r(detuning.abs(), pol) * pump_power * l_eff * bandwidth;
        let occupancy = if temperature == 0.0 {
            0.0
        } else {
            thermal_occupancy(detuning.abs(), temperature)?
        };
        Ok(if detuning > 0.0 {
            base * (occupancy + 1.0)
        } else {
            base * occupancy
        })
    }
}

/// Gain spectra sampled on detunings `Ω/2π` (Hz, pump − wave).
#[derive(Debug, Clone, Serialize)]
pub struct RamanGainCurve {
    pub detuning_hz: Vec<f64>,
    /// W
    pub pump_power: f64,
    /// 1/(W·m)
    pub r_a: Vec<f64>,
    pub r_b: Vec<f64>,
    pub r_parallel: Vec<f64>,
    pub r_perpendicular: Vec<f64>,
}

impl RamanGainCurve {
    /// Per-length power gain `r·P`, 1/m.
    pub fn parallel_gain_per_m(&self) -> Vec<f64> {
        self.r_parallel
            .iter()
            .map(|r| r * self.pump_power)
            .collect()
    }

    pub fn perpendicular_gain_per_m(&self) -> Vec<f64> {
        self.r_perpendicular
            .iter()
            .map(|r| r * self.pump_power)
            .collect()
    }

    /// R⊥/R∥ per detuning (NaN where R∥ = 0).
    pub fn depolarization_ratio(&self) -> Vec<f64> {
        self.r_perpendicular
            .iter()
            .zip(&self.r_parallel)
            .map(|(p, q)| if *q == 0.0 { f64::NAN } else { p / q })
            .collect()
    }
}

/// Bose–Einstein phonon occupancy `1/(exp(ħΩ/k_BT) − 1)`.
pub fn thermal_occupancy(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain("phonon occupancy needs a positive detuning"));
    }
    if !(temperature > 0.0) {
        return Err(Error::domain("temperature must be positive"));
    }
    Ok(1.0 / (HBAR * omega / (KB * temperature)).exp_m1())
}
