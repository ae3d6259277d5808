//! Symmetric split-step Fourier integration of the Manakov equations with an
//! optional delayed Raman response, and ensemble-averaged output spectra.
//!
//! Linear part (both polarizations, spectral domain):
//! `c_k ← c_k · exp(i·[β2/2·ω_k² + β3/6·ω_k³]·h − α·h/2)`.
//!
//! Nonlinear part (time domain), Raman-free:
//! `A ← A · exp(iγh·(|Ax|² + |Ay|²))`, which preserves |Ax|² + |Ay|² pointwise.
//!
//! With Raman the per-sample operator is `exp(iγh·M)` where `M` is the real
//! symmetric matrix
//! ```text
//! (1 − f_R)(Ix + Iy)·1 + f_R·[ (Ra+Rb)⊛Ix + Ra⊛Iy     ½·Rb⊛Q            ]
//!                            [ ½·Rb⊛Q                (Ra+Rb)⊛Iy + Ra⊛Ix ]
//! ```
//! with `Q = 2·Re(Ax·Ay*)`, evaluated from the field at the start of the
//! step. Convolutions are products with the analytic transfer functions on
//! the grid.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fiber::FiberSpec;
use crate::field::{superpose, PolarizedField};
use crate::grid::TimeFrequencyGrid;
use crate::raman::{GridKernels, RamanResponse};
use crate::sources::{make_source, SourceKind, SourceSpec};
use crate::spectral::{periodogram, SpectralPlan};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepConfig {
    /// m
    pub dz: f64,
    pub include_raman: bool,
    pub loss_on: bool,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            dz: 0.5,
            include_raman: false,
            loss_on: true,
        }
    }
}

/// Step lengths covering `length`: full steps of `dz` plus one remainder.
fn step_lengths(length: f64, dz: f64) -> Vec<f64> {
    let full = (length / dz).floor() as usize;
    let mut steps = vec![dz; full];
    let rest = length - full as f64 * dz;
    if rest > 1e-9 * dz {
        steps.push(rest);
    }
    steps
}

/// Spectral phase per metre, β2/2·ω² + β3/6·ω³, at the grid reference.
fn dispersion_phase(grid: &TimeFrequencyGrid, fiber: &FiberSpec) -> Vec<f64> {
    let nu0 = grid.reference_frequency();
    let b2 = fiber.beta2_at_frequency(nu0);
    let b3 = fiber.beta3_at_frequency(nu0);
    grid.angular_offsets()
        .into_iter()
        .map(|w| 0.5 * b2 * w * w + b3 / 6.0 * w * w * w)
        .collect()
}

fn linear_operator(phase: &[f64], alpha: f64, h: f64) -> Vec<Complex64> {
    let amp = (-0.5 * alpha * h).exp();
    phase
        .iter()
        .map(|p| Complex64::from_polar(amp, p * h))
        .collect()
}

fn loss_alpha(fiber: &FiberSpec, loss_on: bool) -> f64 {
    if loss_on {
        fiber.alpha()
    } else {
        0.0
    }
}

/// Dispersion (and loss) over `dz`, applied to both polarizations.
pub fn linear_half_step(
    field: &PolarizedField,
    fiber: &FiberSpec,
    dz: f64,
    loss_on: bool,
) -> PolarizedField {
    let grid = &field.grid;
    let op = linear_operator(
        &dispersion_phase(grid, fiber),
        loss_alpha(fiber, loss_on),
        dz,
    );
    let mut plan = SpectralPlan::new(grid.n_points());
    let mut out = field.clone();
    for a in [&mut out.ax, &mut out.ay] {
        plan.to_spectrum(a);
        a.iter_mut().zip(&op).for_each(|(c, o)| *c *= o);
        plan.to_time(a);
    }
    out
}

/// Kerr (and optionally Raman) phase over `dz`.
pub fn nonlinear_step(
    field: &PolarizedField,
    fiber: &FiberSpec,
    dz: f64,
    raman: Option<&RamanResponse>,
) -> PolarizedField {
    let mut out = field.clone();
    let mut plan = SpectralPlan::new(field.grid.n_points());
    let kernels = raman.map(|r| r.on_grid(&field.grid));
    let mut work = NonlinearWork::new(field.grid.n_points());
    apply_nonlinear(&mut out, fiber, dz, kernels.as_ref(), &mut plan, &mut work);
    out
}

struct NonlinearWork {
    intensities: Vec<Complex64>,
    conv_par: Vec<Complex64>,
    conv_iso: Vec<Complex64>,
    cross: Vec<Complex64>,
}

impl NonlinearWork {
    fn new(n: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            intensities: vec![z; n],
            conv_par: vec![z; n],
            conv_iso: vec![z; n],
            cross: vec![z; n],
        }
    }
}

/// Applies the nonlinear operator in place; returns Σ(|Ax|² + |Ay|²) at the
/// start of the step for finiteness checks.
fn apply_nonlinear(
    field: &mut PolarizedField,
    fiber: &FiberSpec,
    h: f64,
    kernels: Option<&GridKernels>,
    plan: &mut SpectralPlan,
    work: &mut NonlinearWork,
) -> f64 {
    let g = fiber.gamma * h;
    match kernels {
        None => {
            let mut sum = 0.0;
            for (x, y) in field.ax.iter_mut().zip(field.ay.iter_mut()) {
                let i = x.norm_sqr() + y.norm_sqr();
                sum += i;
                let (s, c) = (g * i).sin_cos();
                let rot = Complex64::new(c, s);
                *x *= rot;
                *y *= rot;
            }
            sum
        }
        Some(k) => {
            let fr = fiber.raman_fraction;
            // Pack Ix + i·Iy: the kernels are real in time, so one spectrum
            // convolves both intensities at once.
            let mut sum = 0.0;
            for ((w, c), (x, y)) in work
                .intensities
                .iter_mut()
                .zip(work.cross.iter_mut())
                .zip(field.ax.iter().zip(&field.ay))
            {
                let (ix, iy) = (x.norm_sqr(), y.norm_sqr());
                sum += ix + iy;
                *w = Complex64::new(ix, iy);
                *c = Complex64::new(2.0 * (x * y.conj()).re, 0.0);
            }
            plan.to_spectrum(&mut work.intensities);
            plan.to_spectrum(&mut work.cross);
            for (((p, i), s), (ra, rb)) in work
                .conv_par
                .iter_mut()
                .zip(work.conv_iso.iter_mut())
                .zip(&work.intensities)
                .zip(k.r_a.iter().zip(&k.r_b))
            {
                *p = s * (ra + rb);
                *i = s * ra;
            }
            work.cross
                .iter_mut()
                .zip(&k.r_b)
                .for_each(|(c, rb)| *c *= rb);
            plan.to_time(&mut work.conv_par);
            plan.to_time(&mut work.conv_iso);
            plan.to_time(&mut work.cross);
            for n in 0..field.ax.len() {
                let (x, y) = (field.ax[n], field.ay[n]);
                let kerr = (1.0 - fr) * (x.norm_sqr() + y.norm_sqr());
                let par = work.conv_par[n];
                let iso = work.conv_iso[n];
                let m11 = kerr + fr * (par.re + iso.im);
                let m22 = kerr + fr * (par.im + iso.re);
                let m12 = fr * 0.5 * work.cross[n].re;
                // exp(iθM) for real symmetric M = m0·1 + [[d, o], [o, −d]].
                let m0 = 0.5 * (m11 + m22);
                let d = 0.5 * (m11 - m22);
                let r = (d * d + m12 * m12).sqrt();
                let phase = Complex64::from_polar(1.0, g * m0);
                let (sr, cr) = (g * r).sin_cos();
                let sinc = if r > 0.0 { sr / r } else { g };
                let a11 = Complex64::new(cr, sinc * d);
                let a22 = Complex64::new(cr, -sinc * d);
                let a12 = Complex64::new(0.0, sinc * m12);
                field.ax[n] = phase * (a11 * x + a12 * y);
                field.ay[n] = phase * (a12 * x + a22 * y);
            }
            sum
        }
    }
}

/// Split-step integrator with precomputed linear operators.
pub struct SplitStepSolver {
    grid: TimeFrequencyGrid,
    fiber: FiberSpec,
    cfg: StepConfig,
    phase: Vec<f64>,
    kernels: Option<GridKernels>,
}

impl SplitStepSolver {
    pub fn new(
        grid: &TimeFrequencyGrid,
        fiber: &FiberSpec,
        cfg: StepConfig,
        raman: Option<&RamanResponse>,
    ) -> Result<Self> {
        fiber.validate()?;
        if !(cfg.dz > 0.0 && cfg.dz <= fiber.length) {
            return Err(Error::domain(format!(
                "step {} m must lie in (0, {}] m",
                cfg.dz, fiber.length
            )));
        }
        let kernels = match (cfg.include_raman, raman) {
            (false, _) => None,
            (true, Some(r)) => Some(r.on_grid(grid)),
            (true, None) => {
                return Err(Error::domain(
                    "Raman propagation requested without a response",
                ))
            }
        };
        Ok(Self {
            grid: grid.clone(),
            fiber: fiber.clone(),
            cfg,
            phase: dispersion_phase(grid, fiber),
            kernels,
        })
    }

    pub fn n_steps(&self) -> usize {
        step_lengths(self.fiber.length, self.cfg.dz).len()
    }

    /// Propagates over the full fiber length.
    pub fn propagate(&self, input: &PolarizedField) -> Result<PolarizedField> {
        if input.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.n_points();
        let alpha = loss_alpha(&self.fiber, self.cfg.loss_on);
        let steps = step_lengths(self.fiber.length, self.cfg.dz);
        let mut ops: Vec<(f64, Vec<Complex64>)> = Vec::new();
        let mut op_for = |len: f64| -> usize {
            if let Some(i) = ops.iter().position(|(l, _)| *l == len) {
                return i;
            }
            ops.push((len, linear_operator(&self.phase, alpha, len)));
            ops.len() - 1
        };
        // Precompute the distinct linear lengths.
        let mut schedule = Vec::with_capacity(steps.len() + 1);
        schedule.push(op_for(0.5 * steps[0]));
        for i in 0..steps.len() {
            let next = steps.get(i + 1).copied().unwrap_or(0.0);
            schedule.push(op_for(0.5 * (steps[i] + next)));
        }

        let mut plan = SpectralPlan::new(n);
        let mut work = NonlinearWork::new(n);
        let mut field = input.clone();
        // A polarization component that starts identically zero stays zero
        // under the Manakov nonlinearity, so its transforms can be skipped.
        let live_x = field.ax.iter().any(|c| *c != Complex64::new(0.0, 0.0));
        let live_y = field.ay.iter().any(|c| *c != Complex64::new(0.0, 0.0));
        let scale = plan.scale();
        let scaled: Vec<Vec<Complex64>> = ops
            .iter()
            .map(|(_, op)| op.iter().map(|o| o * scale).collect())
            .collect();
        let lin = |a: &mut Vec<Complex64>, op: &[Complex64]| {
            a.iter_mut().zip(op).for_each(|(c, o)| *c *= o);
        };
        let forward = |plan: &mut SpectralPlan, field: &mut PolarizedField, op: &[Complex64]| {
            for (live, a) in [(live_x, &mut field.ax), (live_y, &mut field.ay)] {
                if live {
                    plan.to_spectrum_unscaled(a);
                    lin(a, op);
                }
            }
        };
        let backward = |plan: &mut SpectralPlan, field: &mut PolarizedField| {
            for (live, a) in [(live_x, &mut field.ax), (live_y, &mut field.ay)] {
                if live {
                    plan.to_time(a);
                }
            }
        };
        forward(&mut plan, &mut field, &scaled[schedule[0]]);
        for (i, &h) in steps.iter().enumerate() {
            backward(&mut plan, &mut field);
            let sum = apply_nonlinear(
                &mut field,
                &self.fiber,
                h,
                self.kernels.as_ref(),
                &mut plan,
                &mut work,
            );
            if !sum.is_finite() {
                return Err(Error::Numeric {
                    step: i,
                    what: format!(
                        "field power became {sum} at z = {:.3} m",
                        i as f64 * self.cfg.dz
                    ),
                });
            }
            forward(&mut plan, &mut field, &scaled[schedule[i + 1]]);
        }
        backward(&mut plan, &mut field);
        if !field.is_finite() {
            return Err(Error::Numeric {
                step: steps.len(),
                what: "non-finite samples at the fiber output".into(),
            });
        }
        Ok(field)
    }
}

/// One-shot propagation.
pub fn propagate(
    field: &PolarizedField,
    fiber: &FiberSpec,
    cfg: StepConfig,
    raman: Option<&RamanResponse>,
) -> Result<PolarizedField> {
    SplitStepSolver::new(&field.grid, fiber, cfg, raman)?.propagate(field)
}

/// Ensemble-mean output spectrum, sorted by ascending frequency.
#[derive(Debug, Clone, Serialize)]
pub struct AveragedSpectrum {
    pub reference_frequency: f64,
    pub df: f64,
    /// Hz from the reference.
    pub frequency_offsets: Vec<f64>,
    /// W/Hz
    pub psd_x: Vec<f64>,
    pub psd_y: Vec<f64>,
    pub psd_total: Vec<f64>,
    pub n_runs: usize,
}

impl AveragedSpectrum {
    fn from_fft_order(grid: &TimeFrequencyGrid, px: &[f64], py: &[f64], n_runs: usize) -> Self {
        let order: Vec<usize> = grid.ascending_order().collect();
        let psd_x: Vec<f64> = order.iter().map(|&k| px[k]).collect();
        let psd_y: Vec<f64> = order.iter().map(|&k| py[k]).collect();
        Self {
            reference_frequency: grid.reference_frequency(),
            df: grid.df(),
            frequency_offsets: order.iter().map(|&k| grid.offset_of_bin(k)).collect(),
            psd_total: psd_x.iter().zip(&psd_y).map(|(x, y)| x + y).collect(),
            psd_x,
            psd_y,
            n_runs,
        }
    }

    pub fn wavelength_of(&self, i: usize) -> f64 {
        crate::consts::wavelength_of(self.reference_frequency + self.frequency_offsets[i])
    }

    pub fn total_power(&self) -> f64 {
        self.psd_total.iter().sum::<f64>() * self.df
    }

    /// Power within `±bandwidth/2` of an absolute optical frequency.
    pub fn band_power(&self, center_frequency: f64, bandwidth: f64) -> f64 {
        self.band_power_of(&self.psd_total, center_frequency, bandwidth)
    }

    pub fn band_power_of(&self, psd: &[f64], center_frequency: f64, bandwidth: f64) -> f64 {
        let c = center_frequency - self.reference_frequency;
        self.frequency_offsets
            .iter()
            .zip(psd)
            .filter(|(f, _)| (**f - c).abs() <= 0.5 * bandwidth)
            .map(|(_, p)| p)
            .sum::<f64>()
            * self.df
    }

    pub fn span(&self) -> (f64, f64) {
        (
            self.reference_frequency + self.frequency_offsets[0],
            self.reference_frequency + self.frequency_offsets[self.frequency_offsets.len() - 1],
        )
    }
}

/// Everything needed to run the stochastic propagation ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleScenario {
    pub grid: TimeFrequencyGrid,
    pub fiber: FiberSpec,
    pub sources: Vec<SourceSpec>,
    pub step: StepConfig,
    pub base_seed: u64,
    pub raman: Option<RamanResponse>,
}

impl EnsembleScenario {
    /// Seed of run `index`: base_seed XOR index; sources use separate streams.
    pub fn run_seed(&self, index: usize) -> u64 {
        self.base_seed ^ index as u64
    }

    pub fn input_field(&self, index: usize) -> Result<PolarizedField> {
        let seed = self.run_seed(index);
        let mut fields = vec![PolarizedField::zeros(&self.grid)];
        for (k, s) in self.sources.iter().enumerate() {
            let spec = SourceSpec {
                seed,
                stream: k as u64,
                ..s.clone()
            };
            fields.push(make_source(&spec, &self.grid)?);
        }
        superpose(&fields)
    }

    pub fn is_deterministic(&self) -> bool {
        self.sources.iter().all(|s| s.kind == SourceKind::Cw)
    }
}

/// Mean periodogram of `n_runs` independent propagations. Runs execute in
/// parallel; the mean is accumulated in run order, so the result does not
/// depend on scheduling.
pub fn ensemble_spectrum(scenario: &EnsembleScenario, n_runs: usize) -> Result<AveragedSpectrum> {
    if n_runs == 0 {
        return Err(Error::domain("ensemble needs at least one run"));
    }
    let solver = SplitStepSolver::new(
        &scenario.grid,
        &scenario.fiber,
        scenario.step,
        scenario.raman.as_ref(),
    )?;
    let runs: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let input = scenario.input_field(i)?;
            let out = solver.propagate(&input)?;
            Ok(periodogram(&out))
        })
        .collect();
    let n = scenario.grid.n_points();
    let mut px = vec![0.0; n];
    let mut py = vec![0.0; n];
    for run in runs {
        let (x, y) = run?;
        px.iter_mut().zip(&x).for_each(|(a, b)| *a += b);
        py.iter_mut().zip(&y).for_each(|(a, b)| *a += b);
    }
    let inv = 1.0 / n_runs as f64;
    px.iter_mut().chain(py.iter_mut()).for_each(|v| *v *= inv);
    Ok(AveragedSpectrum::from_fft_order(
        &scenario.grid,
        &px,
        &py,
        n_runs,
    ))
}

/// Periodogram of a single field as an [`AveragedSpectrum`] with one run.
pub fn single_spectrum(field: &PolarizedField) -> AveragedSpectrum {
    let (px, py) = periodogram(field);
    AveragedSpectrum::from_fft_order(&field.grid, &px, &py, 1)
}
