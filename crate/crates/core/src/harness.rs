//! Scenario assembly for the three result surfaces: ensemble spectra of the
//! converter, gated counts under the four pump/signal toggle conditions,
//! and the single-pump Raman gain scan. Also the CSV and manifest writers
//! used by the command-line tool.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::config::{ConversionPath, ScenarioConfig};
use crate::consts::{frequency_of, wavelength_of, NM};
use crate::coupled_mode::{
    conversion, efficiency_sweep, idler_polarization, ssfm_efficiency, BsSetup, SweepRow,
    CROSSCHECK_BAND,
};
use crate::detection::{
    attenuation, click_probability, counts_per_second, mean_photons_per_gate, FilterChain,
    FilterElement, Line,
};
use crate::error::{Error, Result};
use crate::fiber::check_window;
use crate::polarization::{JonesVector, PolarizationCase};
use crate::raman::{RamanGain, RamanGainCurve, RamanPolarization, RamanResponse};
use crate::ssfm::{ensemble_spectrum, AveragedSpectrum, EnsembleScenario};
use crate::wavelength::delta_beta_dfwm;

/// Which sources are switched on in a counting measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Condition {
    P1P2S,
    P1S,
    S,
    P2S,
}

impl Condition {
    pub const ALL: [Condition; 4] = [Self::P1P2S, Self::P1S, Self::S, Self::P2S];

    pub fn label(self) -> &'static str {
        match self {
            Self::P1P2S => "P1P2S",
            Self::P1S => "P1S",
            Self::S => "S",
            Self::P2S => "P2S",
        }
    }

    /// (P1 on, P2 on)
    pub fn pumps(self) -> (bool, bool) {
        match self {
            Self::P1P2S => (true, true),
            Self::P1S => (true, false),
            Self::S => (false, false),
            Self::P2S => (false, true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Channel {
    Signal,
    Idler,
}

impl Channel {
    pub const ALL: [Channel; 2] = [Self::Signal, Self::Idler];

    pub fn label(self) -> &'static str {
        match self {
            Self::Signal => "signal",
            Self::Idler => "idler",
        }
    }
}

fn bs_setup(cfg: &ScenarioConfig, p1: f64, p2: f64) -> BsSetup {
    BsSetup {
        p1_power: p1,
        p2_power: p2,
        lambda_p1: cfg.p1.wavelength,
        lambda_p2: cfg.p2.wavelength,
        lambda_s: cfg.signal.wavelength,
        include_xpm: cfg.include_xpm,
    }
}

/// Propagation ensemble of `case` with the given launched signal power.
pub fn ensemble_scenario(
    cfg: &ScenarioConfig,
    case: PolarizationCase,
    signal_power: f64,
) -> Result<EnsembleScenario> {
    let grid = cfg.grid.build()?;
    let (j1, j2, js) = case.jones();
    let mut sources = Vec::new();
    for (src, jones, power) in [
        (&cfg.p1, j1, cfg.p1.power),
        (&cfg.p2, j2, cfg.p2.power),
        (&cfg.signal, js, signal_power),
    ] {
        if src.on && power > 0.0 {
            let mut spec = src.spec(power);
            spec.jones = jones;
            sources.push(spec);
        }
    }
    let raman = if cfg.step.include_raman {
        Some(RamanResponse::build(cfg.raman_params())?)
    } else {
        None
    };
    Ok(EnsembleScenario {
        grid,
        fiber: cfg.fiber.clone(),
        sources,
        step: cfg.step,
        base_seed: cfg.base_seed,
        raman,
    })
}

/// Launched signal power when the signal is not attenuated (spectrum mode).
pub fn spectrum_signal_power(cfg: &ScenarioConfig) -> f64 {
    cfg.signal.power * attenuation(&[cfg.loss.tap_coupler_db])
}

/// Launched signal power in photon-counting mode.
pub fn counting_signal_power(cfg: &ScenarioConfig) -> f64 {
    cfg.signal.power * attenuation(&[cfg.loss.counting_input_db])
}

#[derive(Debug, Clone, Serialize)]
pub struct BandMarker {
    pub name: String,
    /// m
    pub wavelength: f64,
    /// Integrated power within the marker band, W.
    pub band_power: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub case: PolarizationCase,
    pub spectrum: AveragedSpectrum,
    pub markers: Vec<BandMarker>,
    pub seeds: Vec<u64>,
}

impl SpectrumReport {
    pub fn marker(&self, name: &str) -> Option<&BandMarker> {
        self.markers.iter().find(|m| m.name == name)
    }
}

/// Signal, BS idler and P1-degenerate idler band powers of a spectrum.
pub fn band_markers(cfg: &ScenarioConfig, spectrum: &AveragedSpectrum) -> Result<Vec<BandMarker>> {
    let setup = bs_setup(cfg, cfg.p1.power, cfg.p2.power);
    let lines = [
        ("signal", cfg.signal.wavelength),
        ("bs_idler", setup.idler_wavelength()?),
        ("dfwm_idler", setup.dfwm_idler_wavelength()?),
    ];
    Ok(lines
        .iter()
        .map(|(name, l)| BandMarker {
            name: name.to_string(),
            wavelength: *l,
            band_power: spectrum.band_power(frequency_of(*l), CROSSCHECK_BAND),
        })
        .collect())
}

/// Ensemble-averaged output spectrum with the un-attenuated signal.
pub fn run_spectrum_experiment(cfg: &ScenarioConfig) -> Result<SpectrumReport> {
    run_spectrum_for_case(cfg, cfg.case)
}

pub fn run_spectrum_for_case(
    cfg: &ScenarioConfig,
    case: PolarizationCase,
) -> Result<SpectrumReport> {
    cfg.validate()?;
    let scenario = ensemble_scenario(cfg, case, spectrum_signal_power(cfg))?;
    let spectrum = ensemble_spectrum(&scenario, cfg.n_runs)?;
    let markers = band_markers(cfg, &spectrum)?;
    let seeds = (0..cfg.n_runs).map(|i| scenario.run_seed(i)).collect();
    Ok(SpectrumReport {
        case,
        spectrum,
        markers,
        seeds,
    })
}

/// Contributions to the mean photon number of one gate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Decomposition {
    /// The channel's own wave in its passband: converted idler, or the
    /// residual signal. Photons per gate.
    pub converted: f64,
    /// Spontaneous Raman photons per gate.
    pub raman_noise: f64,
    /// Out-of-band light through the filter rejection, photons per gate.
    pub leakage: f64,
    /// Dark-click probability per gate.
    pub dark: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountRow {
    pub channel: Channel,
    pub condition: Condition,
    pub case: PolarizationCase,
    pub mu_per_gate: f64,
    pub clicks_per_s: f64,
    pub decomposition: Decomposition,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub case: PolarizationCase,
    /// BS efficiency used for the all-on condition.
    pub bs_efficiency: f64,
    pub conversion: ConversionPath,
    pub rows: Vec<CountRow>,
}

impl CountReport {
    pub fn row(&self, channel: Channel, condition: Condition) -> &CountRow {
        self.rows
            .iter()
            .find(|r| r.channel == channel && r.condition == condition)
            .expect("every channel/condition pair is present")
    }

    pub fn mu(&self, channel: Channel, condition: Condition) -> f64 {
        self.row(channel, condition).mu_per_gate
    }

    pub fn clicks(&self, channel: Channel, condition: Condition) -> f64 {
        self.row(channel, condition).clicks_per_s
    }
}

/// Filter chain in front of one counter.
pub fn channel_chain(cfg: &ScenarioConfig, channel: Channel, center: f64) -> FilterChain {
    let f = &cfg.filters;
    let chain = FilterChain::new(vec![
        FilterElement::new(
            "nbf",
            center,
            f.nbf_bandwidth,
            f.nbf_insertion_loss_db,
            f.nbf_rejection_db,
        ),
        FilterElement::new(
            "tunable",
            center,
            f.tunable_bandwidth,
            f.tunable_insertion_loss_db,
            f.tunable_rejection_db,
        ),
    ])
    .with_flat_loss(cfg.loss.output_coupler_db);
    match channel {
        Channel::Signal => chain.with_flat_loss(cfg.loss.signal_attenuator_db),
        Channel::Idler => chain,
    }
}

struct Wave {
    wavelength: f64,
    power: f64,
    jones: JonesVector,
}

/// Gate-averaged counts of both channels under all four conditions, using
/// the configured case and conversion path.
pub fn run_counting_experiment(cfg: &ScenarioConfig) -> Result<CountReport> {
    cfg.validate()?;
    let eta = match cfg.conversion {
        ConversionPath::CoupledMode => None,
        ConversionPath::Ssfm => Some(ssfm_conversion(cfg, cfg.case)?),
    };
    counting_for_case(cfg, cfg.case, eta)
}

/// BS efficiency of `case` read from an SSFM ensemble at counting power.
pub fn ssfm_conversion(cfg: &ScenarioConfig, case: PolarizationCase) -> Result<f64> {
    let ps = counting_signal_power(cfg);
    let scenario = ensemble_scenario(cfg, case, ps)?;
    let spectrum = ensemble_spectrum(&scenario, cfg.n_runs)?;
    ssfm_efficiency(&spectrum, &bs_setup(cfg, cfg.p1.power, cfg.p2.power), ps)
}

/// Counting model for one case. `bs_override` replaces the coupled-mode
/// efficiency of the all-on condition.
pub fn counting_for_case(
    cfg: &ScenarioConfig,
    case: PolarizationCase,
    bs_override: Option<f64>,
) -> Result<CountReport> {
    let fiber = &cfg.fiber;
    let det = &cfg.detector;
    let (j1, j2, js) = case.jones();
    let raman = RamanGain::new(RamanResponse::build(cfg.raman_params())?, fiber.gamma);
    let l_eff = fiber.effective_length();
    let t_fiber = (-fiber.alpha() * fiber.length).exp();
    let lambda_s = cfg.signal.wavelength;
    let full = bs_setup(cfg, cfg.p1.power, cfg.p2.power);
    let lambda_i = full.idler_wavelength()?;
    let idler_jones = idler_polarization(&j1, &j2, &js);
    let bandwidth = cfg.filters.nbf_bandwidth.min(cfg.filters.tunable_bandwidth);
    let ps = if cfg.signal.on {
        counting_signal_power(cfg)
    } else {
        0.0
    };

    let mut bs_used = 0.0;
    let mut rows = Vec::with_capacity(8);
    for condition in Condition::ALL {
        let (on1, on2) = condition.pumps();
        let p1 = if on1 && cfg.p1.on { cfg.p1.power } else { 0.0 };
        let p2 = if on2 && cfg.p2.on { cfg.p2.power } else { 0.0 };
        let pumps = [(p1, cfg.p1.wavelength, j1), (p2, cfg.p2.wavelength, j2)];

        let eta_bs = if p1 > 0.0 && p2 > 0.0 {
            let e = match bs_override {
                Some(e) => e,
                None => bs_setup(cfg, p1, p2).bs_efficiency(fiber, case)?,
            };
            bs_used = e;
            e
        } else {
            0.0
        };

        // Degenerate FWM with each pump amplifies the signal and emits a
        // conjugate idler; Raman exchange adds gain (Stokes) or loss.
        let mut waves = Vec::new();
        let mut signal_gain = 1.0;
        let mut raman_exponent = 0.0;
        for &(p, lp, jp) in &pumps {
            if p <= 0.0 || ps <= 0.0 {
                continue;
            }
            let overlap = js.overlap(&jp);
            let db = delta_beta_dfwm(lambda_s, lp, fiber)?;
            let eta = conversion(overlap.sqrt() * fiber.gamma * p, db, fiber.length);
            signal_gain += eta;
            let lambda_d = wavelength_of(2.0 * frequency_of(lp) - frequency_of(lambda_s));
            waves.push(Wave {
                wavelength: lambda_d,
                power: ps * eta * lambda_s / lambda_d * t_fiber,
                jones: jp,
            });
            let omega = 2.0 * PI * (frequency_of(lp) - frequency_of(lambda_s));
            raman_exponent += raman.r(omega, RamanPolarization::Overlap(overlap)) * p * l_eff;
        }
        let signal_out = ps * (1.0 - eta_bs) * signal_gain * raman_exponent.exp() * t_fiber;
        let idler_out = ps * eta_bs * lambda_s / lambda_i * t_fiber;
        waves.push(Wave {
            wavelength: lambda_s,
            power: signal_out,
            jones: js,
        });
        waves.push(Wave {
            wavelength: lambda_i,
            power: idler_out,
            jones: idler_jones,
        });
        for &(p, lp, jp) in &pumps {
            if p > 0.0 {
                waves.push(Wave {
                    wavelength: lp,
                    power: p * t_fiber,
                    jones: jp,
                });
            }
        }

        for channel in Channel::ALL {
            let (center, analyzer) = match channel {
                Channel::Signal => (lambda_s, js),
                Channel::Idler => (lambda_i, idler_jones),
            };
            let chain = channel_chain(cfg, channel, center);
            let project = |j: &JonesVector| {
                if cfg.polarizer {
                    analyzer.overlap(j)
                } else {
                    1.0
                }
            };
            let mut d = Decomposition {
                dark: det.dark_prob_per_gate(),
                ..Default::default()
            };
            for w in &waves {
                if w.power <= 0.0 {
                    continue;
                }
                let out = chain.apply_lines(&[Line {
                    frequency: frequency_of(w.wavelength),
                    power: w.power * project(&w.jones),
                }]);
                let mu = mean_photons_per_gate(out.total(), w.wavelength, det.gate);
                let own = (w.wavelength - center).abs() < 1e-15 && out.in_band > 0.0;
                if own {
                    d.converted += mu;
                } else {
                    d.leakage += mu;
                }
            }
            let t_band = chain.transmission(frequency_of(center));
            for &(p, lp, jp) in &pumps {
                if p <= 0.0 {
                    continue;
                }
                let omega = 2.0 * PI * (frequency_of(lp) - frequency_of(center));
                let flux = if cfg.polarizer {
                    let o = analyzer.overlap(&jp);
                    raman.spontaneous_flux(
                        p,
                        l_eff,
                        omega,
                        bandwidth,
                        RamanPolarization::Overlap(o),
                        cfg.temperature,
                    )?
                } else {
                    raman.spontaneous_flux(
                        p,
                        l_eff,
                        omega,
                        bandwidth,
                        RamanPolarization::Parallel,
                        cfg.temperature,
                    )? + raman.spontaneous_flux(
                        p,
                        l_eff,
                        omega,
                        bandwidth,
                        RamanPolarization::Perpendicular,
                        cfg.temperature,
                    )?
                };
                d.raman_noise += flux * det.gate * t_band;
            }
            let mu = d.converted + d.raman_noise + d.leakage;
            let clicks = counts_per_second(click_probability(mu, det), det);
            rows.push(CountRow {
                channel,
                condition,
                case,
                mu_per_gate: mu,
                clicks_per_s: clicks,
                decomposition: d,
            });
        }
    }
    rows.sort_by_key(|r| (r.channel as u8, r.condition as u8));
    Ok(CountReport {
        case,
        bs_efficiency: bs_used,
        conversion: if bs_override.is_some() {
            ConversionPath::Ssfm
        } else {
            ConversionPath::CoupledMode
        },
        rows,
    })
}

/// Detunings of the Raman scan: ±step … ±max, ascending, zero skipped.
pub fn scan_detunings(cfg: &ScenarioConfig) -> Vec<f64> {
    let n = (cfg.scan.max_detuning / cfg.scan.step).round() as i64;
    (-n..=n)
        .filter(|&k| k != 0)
        .map(|k| k as f64 * cfg.scan.step)
        .collect()
}

/// Parallel and perpendicular Raman gain around a single pump.
pub fn run_raman_scan(cfg: &ScenarioConfig) -> Result<RamanGainCurve> {
    if !(cfg.scan.pump_power >= 0.0) {
        return Err(Error::Config("scan.pump_power_mw must be >= 0".into()));
    }
    if !(cfg.scan.step > 0.0) || !(cfg.scan.max_detuning >= cfg.scan.step) {
        return Err(Error::Config(
            "scan.step_thz must be positive and below scan.max_detuning_thz".into(),
        ));
    }
    let nu_p = frequency_of(cfg.scan.pump_wavelength);
    for edge in [nu_p - cfg.scan.max_detuning, nu_p + cfg.scan.max_detuning] {
        check_window(wavelength_of(edge))?;
    }
    let gain = RamanGain::new(RamanResponse::build(cfg.raman_params())?, cfg.fiber.gamma);
    Ok(gain.gain_curves(cfg.scan.pump_power, &scan_detunings(cfg)))
}

/// Parses `start:stop:step` (nm) into an inclusive ascending list (m).
pub fn parse_range_nm(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Config(format!("range {text:?} must look like start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (a, b, s) = (v[0], v[1], v[2]);
    if !(s > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let n = ((b - a) / s + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| (a + k as f64 * s) * NM).collect())
}

/// BS efficiency sweep over signal wavelengths at the configured powers.
pub fn run_bs_sweep(
    cfg: &ScenarioConfig,
    signal_wavelengths: &[f64],
    case: PolarizationCase,
) -> Result<Vec<SweepRow>> {
    let setup = bs_setup(cfg, cfg.p1.power, cfg.p2.power);
    efficiency_sweep(signal_wavelengths, &setup, &cfg.fiber, case)
}

/// Locale-free float text that parses back to the same double.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_spectrum_csv<W: Write>(w: W, spectrum: &AveragedSpectrum) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["frequency_offset_hz", "lambda_nm", "psd_total_w_per_hz"])?;
    for (i, (f, p)) in spectrum
        .frequency_offsets
        .iter()
        .zip(&spectrum.psd_total)
        .enumerate()
    {
        out.write_record([
            fmt_f64(*f),
            fmt_f64(spectrum.wavelength_of(i) / NM),
            fmt_f64(*p),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_counts_csv<W: Write>(w: W, report: &CountReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "channel",
        "condition",
        "case",
        "mu_per_gate",
        "clicks_per_s",
    ])?;
    for r in &report.rows {
        out.write_record([
            r.channel.label().to_string(),
            r.condition.label().to_string(),
            r.case.label().to_string(),
            fmt_f64(r.mu_per_gate),
            fmt_f64(r.clicks_per_s),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_raman_csv<W: Write>(w: W, curve: &RamanGainCurve) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["detuning_thz", "r_parallel", "r_perpendicular", "ratio"])?;
    let ratio = curve.depolarization_ratio();
    for (i, r) in ratio.iter().enumerate() {
        out.write_record([
            fmt_f64(curve.detuning_hz[i] * 1e-12),
            fmt_f64(curve.r_parallel[i]),
            fmt_f64(curve.r_perpendicular[i]),
            fmt_f64(*r),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "lambda_s_nm",
        "lambda_i_nm",
        "delta_beta_per_m",
        "eta_db",
        "case",
    ])?;
    for r in rows {
        out.write_record([
            fmt_f64(r.lambda_s / NM),
            fmt_f64(r.lambda_i / NM),
            fmt_f64(r.delta_beta),
            fmt_f64(r.eta_db),
            r.case.label().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, serde_json::Value>,
    pub seeds: Vec<u64>,
    pub outputs: Vec<String>,
    pub details: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, cfg: &ScenarioConfig) -> Self {
        let config = cfg
            .entries()
            .into_iter()
            .map(|(k, v)| {
                (
                    k,
                    serde_json::to_value(v).unwrap_or(serde_json::Value::Null),
                )
            })
            .collect();
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            seeds: Vec::new(),
            outputs: Vec::new(),
            details: serde_json::Value::Null,
        }
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(|e| Error::Io(e.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::{H, KB};
    use crate::raman::thermal_occupancy;
    use PolarizationCase::*;

    fn small_cfg() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.grid.n_points = 1 << 14;
        cfg.grid.time_window = 2e-9;
        cfg.n_runs = 2;
        cfg
    }

    #[test]
    fn conditions_and_channels() {
        assert_eq!(
            Condition::ALL.map(|c| c.label()),
            ["P1P2S", "P1S", "S", "P2S"]
        );
        assert_eq!(Condition::S.pumps(), (false, false));
    }

    #[test]
    fn counting_report_shape_and_orderings() {
        let cfg = ScenarioConfig::default();
        for case in PolarizationCase::ALL {
            let r = counting_for_case(&cfg, case, None).unwrap();
            assert_eq!(r.rows.len(), 8);
            for row in &r.rows {
                assert!(row.clicks_per_s <= cfg.detector.trigger_rate);
                let d = row.decomposition;
                assert!(
                    d.converted >= 0.0 && d.raman_noise >= 0.0 && d.leakage >= 0.0 && d.dark >= 0.0
                );
            }
        }
        let a = counting_for_case(&cfg, A, None).unwrap();
        let all = a.clicks(Channel::Idler, Condition::P1P2S);
        assert!(all > a.clicks(Channel::Idler, Condition::P1S));
        assert!(all > a.clicks(Channel::Idler, Condition::P2S));
        let s = |c| a.mu(Channel::Signal, c);
        assert!(s(Condition::P1S) > s(Condition::S));
        assert!(s(Condition::S) > s(Condition::P2S));
        assert!(s(Condition::P1P2S) < s(Condition::P1S));
    }

    #[test]
    fn case_d_idler_is_additive() {
        let r = counting_for_case(&ScenarioConfig::default(), D, None).unwrap();
        let mu = |c| r.mu(Channel::Idler, c);
        let sum = mu(Condition::P1S) + mu(Condition::P2S) - mu(Condition::S);
        assert!((mu(Condition::P1P2S) / sum - 1.0).abs() < 0.05);
        assert_eq!(
            r.row(Channel::Idler, Condition::P1P2S)
                .decomposition
                .converted,
            0.0
        );
    }

    #[test]
    fn signal_channel_budget_near_six_hundred() {
        let r = counting_for_case(&ScenarioConfig::default(), A, None).unwrap();
        let mu = r.mu(Channel::Signal, Condition::S);
        assert!(mu > 300.0 && mu < 1200.0, "{mu}");
    }

    #[test]
    fn sources_off_gives_dark_counts_only() {
        let mut cfg = ScenarioConfig::default();
        cfg.p1.on = false;
        cfg.p2.on = false;
        cfg.signal.on = false;
        let r = counting_for_case(&cfg, A, None).unwrap();
        for row in &r.rows {
            assert_eq!(row.mu_per_gate, 0.0);
            assert!((row.clicks_per_s - 0.675).abs() < 1e-12);
        }
    }

    #[test]
    fn raman_scan_is_odd_with_ratio_column() {
        let cfg = ScenarioConfig::default();
        let curve = run_raman_scan(&cfg).unwrap();
        let n = curve.detuning_hz.len();
        assert_eq!(n, 300);
        assert!(!curve.detuning_hz.contains(&0.0));
        for i in 0..n / 2 {
            let j = n - 1 - i;
            assert_eq!(curve.detuning_hz[i], -curve.detuning_hz[j]);
            assert!(
                (curve.r_parallel[i] + curve.r_parallel[j]).abs()
                    <= 1e-12 * curve.r_parallel[j].abs()
            );
        }
        let ratio = curve.depolarization_ratio();
        for (f, r) in curve.detuning_hz.iter().zip(&ratio) {
            if (0.3e12..=3e12).contains(&f.abs()) {
                assert!((0.25..=0.35).contains(r), "{f}: {r}");
            }
        }
    }

    #[test]
    fn detailed_balance_at_one_thz() {
        let cfg = ScenarioConfig::default();
        let gain = RamanGain::new(
            RamanResponse::build(cfg.raman_params()).unwrap(),
            cfg.fiber.gamma,
        );
        let w = 2.0 * PI * 1e12;
        let pol = RamanPolarization::Parallel;
        let st = gain
            .spontaneous_flux(1.1e-3, 450.0, w, 1e11, pol, 300.0)
            .unwrap();
        let an = gain
            .spontaneous_flux(1.1e-3, 450.0, -w, 1e11, pol, 300.0)
            .unwrap();
        let oracle = (H * 1e12 / (KB * 300.0)).exp();
        assert!((st / an / oracle - 1.0).abs() < 1e-12);
        assert!((oracle - 1.1735).abs() < 1e-3);
        assert!((1.0 + 1.0 / thermal_occupancy(w, 300.0).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn range_parsing() {
        let r = parse_range_nm("1530:1560:0.5").unwrap();
        assert_eq!(r.len(), 61);
        assert!((r[60] / NM - 1560.0).abs() < 1e-9);
        assert!(r.windows(2).all(|w| w[1] > w[0]));
        assert!(parse_range_nm("1560:1530:0.5").is_err());
        assert!(parse_range_nm("1530:1560").is_err());
        assert!(parse_range_nm("a:b:c").is_err());
        assert_eq!(parse_range_nm("1549.2:1549.2:1").unwrap().len(), 1);
    }

    #[test]
    fn float_text_roundtrips() {
        for x in [
            0.0,
            1549.2,
            -3.1e-27,
            2.5e-9,
            1.0e20,
            62_500_000.0,
            f64::NEG_INFINITY,
        ] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert!(!s.contains(','));
        }
    }

    #[test]
    fn spectrum_with_sources_off_is_zero() {
        let mut cfg = small_cfg();
        cfg.p1.on = false;
        cfg.p2.on = false;
        cfg.signal.on = false;
        cfg.fiber.length = 5.0;
        let r = run_spectrum_experiment(&cfg).unwrap();
        assert!(r.spectrum.psd_total.iter().all(|p| *p == 0.0));
        assert_eq!(r.markers.len(), 3);
    }

    #[test]
    fn spectrum_csv_shape() {
        let mut cfg = small_cfg();
        cfg.fiber.length = 5.0;
        cfg.n_runs = 1;
        let r = run_spectrum_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &r.spectrum).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "frequency_offset_hz,lambda_nm,psd_total_w_per_hz"
        );
        assert_eq!(lines.count(), 1 << 14);
        // Total power survives the round trip through the text form.
        let p: f64 = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
            .sum::<f64>()
            * r.spectrum.df;
        let launched = cfg.p1.power + cfg.p2.power + spectrum_signal_power(&cfg);
        assert!((p / launched - 1.0).abs() < 0.3, "{p} vs {launched}");
    }
}
