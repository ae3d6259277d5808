//! Scenario configuration: a flat key–value schema with dotted section
//! names, read from TOML. Every key has a default reproducing the reference
//! lab setup, so an empty file is a complete configuration.
//!
//! ```toml
//! case = "C"
//! p1.power_mw = 22.0
//! fiber.length_m = 450.0
//!
//! [ensemble]
//! n_runs = 20
//! ```
//!
//! Tables and dotted keys are equivalent; both flatten to `section.key`.

use std::path::Path;

use serde::Serialize;
use toml::Value;

use crate::consts::{GHZ, NM};
use crate::detection::DetectorSpec;
use crate::error::{Error, Result};
use crate::fiber::FiberSpec;
use crate::grid::TimeFrequencyGrid;
use crate::polarization::PolarizationCase;
use crate::raman::{AnisotropicKernel, RamanParams};
use crate::sources::{SourceKind, SourceSpec, SpectralShape};
use crate::ssfm::StepConfig;

/// Prefix of environment overrides.
pub const ENV_PREFIX: &str = "FWMLAB_";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceConfig {
    pub on: bool,
    pub kind: SourceKind,
    /// W
    pub power: f64,
    /// m
    pub wavelength: f64,
    /// FWHM, Hz
    pub bandwidth: f64,
    pub shape: SpectralShape,
}

impl SourceConfig {
    fn pump(power: f64, wavelength_nm: f64, bandwidth_ghz: f64) -> Self {
        Self {
            on: true,
            kind: SourceKind::Ifsfl,
            power,
            wavelength: wavelength_nm * NM,
            bandwidth: bandwidth_ghz * GHZ,
            shape: SpectralShape::Gaussian,
        }
    }

    /// Source spec at a given launched power; polarization is set later.
    pub fn spec(&self, power: f64) -> SourceSpec {
        let jones = crate::polarization::JonesVector::x();
        let mut s = match self.kind {
            SourceKind::Cw => SourceSpec::cw(power, self.wavelength, jones),
            SourceKind::Ifsfl => {
                SourceSpec::ifsfl(power, self.wavelength, self.bandwidth, jones, 0)
            }
        };
        s.shape = self.shape;
        s
    }
}

/// Named attenuations of the set-up, dB.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossBudget {
    /// Signal attenuation before the fiber when counting photons. Includes
    /// the tap coupler.
    pub counting_input_db: f64,
    /// Tap-coupler loss of the signal arm, the only input loss when the
    /// signal is not attenuated.
    pub tap_coupler_db: f64,
    /// Output 50/50 coupler.
    pub output_coupler_db: f64,
    /// Extra attenuator in front of the signal counter.
    pub signal_attenuator_db: f64,
}

impl Default for LossBudget {
    fn default() -> Self {
        Self {
            counting_input_db: 25.6,
            tap_coupler_db: 13.0,
            output_coupler_db: 3.0,
            signal_attenuator_db: 18.0,
        }
    }
}

/// The two cascaded output filters of each channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterConfig {
    /// Hz
    pub nbf_bandwidth: f64,
    pub nbf_insertion_loss_db: f64,
    pub nbf_rejection_db: f64,
    /// Hz
    pub tunable_bandwidth: f64,
    pub tunable_insertion_loss_db: f64,
    pub tunable_rejection_db: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            nbf_bandwidth: 100.0 * GHZ,
            nbf_insertion_loss_db: 3.0,
            nbf_rejection_db: 60.0,
            tunable_bandwidth: 100.0 * GHZ,
            tunable_insertion_loss_db: 3.0,
            tunable_rejection_db: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConversionPath {
    CoupledMode,
    Ssfm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    pub n_points: usize,
    /// s
    pub time_window: f64,
    /// m
    pub reference_wavelength: f64,
}

impl GridConfig {
    pub fn build(&self) -> Result<TimeFrequencyGrid> {
        TimeFrequencyGrid::new(self.n_points, self.time_window, self.reference_wavelength)
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_points: 1 << 17,
            time_window: 16e-9,
            reference_wavelength: 1545.0 * NM,
        }
    }
}

/// Single-pump Raman gain scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    /// W
    pub pump_power: f64,
    /// m
    pub pump_wavelength: f64,
    /// Hz
    pub max_detuning: f64,
    /// Hz
    pub step: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            pump_power: 1.1e-3,
            pump_wavelength: 1540.7 * NM,
            max_detuning: 15e12,
            step: 0.1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub case: PolarizationCase,
    pub p1: SourceConfig,
    pub p2: SourceConfig,
    pub signal: SourceConfig,
    pub fiber: FiberSpec,
    pub grid: GridConfig,
    pub step: StepConfig,
    pub raman_kernel: AnisotropicKernel,
    pub loss: LossBudget,
    pub filters: FilterConfig,
    pub detector: DetectorSpec,
    pub n_runs: usize,
    pub base_seed: u64,
    /// K
    pub temperature: f64,
    pub conversion: ConversionPath,
    pub include_xpm: bool,
    /// Fiber polarizer in front of both counters, aligned to the expected
    /// output polarization of each channel.
    pub polarizer: bool,
    pub scan: ScanConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let mut signal = SourceConfig::pump(5e-3, 1549.2, 0.0);
        signal.kind = SourceKind::Cw;
        Self {
            case: PolarizationCase::A,
            p1: SourceConfig::pump(22e-3, 1540.7, 44.0),
            p2: SourceConfig::pump(15e-3, 1563.9, 50.0),
            signal,
            fiber: FiberSpec::lab_hnlf(),
            grid: GridConfig::default(),
            step: StepConfig {
                dz: 0.5,
                include_raman: false,
                loss_on: true,
            },
            raman_kernel: AnisotropicKernel::Relaxation,
            loss: LossBudget::default(),
            filters: FilterConfig::default(),
            detector: DetectorSpec::default(),
            n_runs: 20,
            base_seed: 0x5eed_2016,
            temperature: 300.0,
            conversion: ConversionPath::CoupledMode,
            include_xpm: false,
            polarizer: true,
            scan: ScanConfig::default(),
        }
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Config(format!("`{key}` expects a number, got {v}"))),
    }
}

fn as_u64(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        // Seeds may exceed i64; accept them as decimal strings too.
        Value::String(s) => s.parse().map_err(|_| {
            Error::Config(format!("`{key}` expects a non-negative integer, got {s:?}"))
        }),
        _ => Err(Error::Config(format!(
            "`{key}` expects a non-negative integer, got {v}"
        ))),
    }
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| Error::Config(format!("`{key}` expects true or false, got {v}")))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::Config(format!("`{key}` expects a string, got {v}")))
}

fn parse_kind(key: &str, v: &Value) -> Result<SourceKind> {
    match as_str(key, v)?.to_ascii_lowercase().as_str() {
        "cw" => Ok(SourceKind::Cw),
        "ifsfl" => Ok(SourceKind::Ifsfl),
        other => Err(Error::Config(format!(
            "`{key}`: unknown source kind {other:?}"
        ))),
    }
}

fn kind_name(k: SourceKind) -> &'static str {
    match k {
        SourceKind::Cw => "cw",
        SourceKind::Ifsfl => "ifsfl",
    }
}

fn parse_shape(key: &str, v: &Value) -> Result<SpectralShape> {
    match as_str(key, v)?.to_ascii_lowercase().as_str() {
        "gaussian" => Ok(SpectralShape::Gaussian),
        "flat-top" | "flat_top" | "flattop" => Ok(SpectralShape::FlatTop),
        other => Err(Error::Config(format!(
            "`{key}`: unknown spectral shape {other:?}"
        ))),
    }
}

fn shape_name(s: SpectralShape) -> &'static str {
    match s {
        SpectralShape::Gaussian => "gaussian",
        SpectralShape::FlatTop => "flat-top",
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.clone())),
        }
    }
}

impl ScenarioConfig {
    /// Parses TOML text on top of the defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut flat = Vec::new();
        flatten("", &table, &mut flat);
        let mut cfg = Self::default();
        for (k, v) in &flat {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        Self::from_toml_str(&text)
    }

    /// Applies `FWMLAB_SEED`, `FWMLAB_RUNS` and `FWMLAB_CASE` overrides from
    /// the given variables.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        for (name, value) in vars {
            let Some(short) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let key = match short {
                "SEED" => "ensemble.base_seed",
                "RUNS" => "ensemble.n_runs",
                "CASE" => "case",
                _ => continue,
            };
            let v =
                match key {
                    "case" => Value::String(value.clone()),
                    _ => Value::Integer(value.trim().parse::<i64>().map_err(|_| {
                        Error::Config(format!("{name}={value:?} is not an integer"))
                    })?),
                };
            self.set(key, &v)?;
        }
        Ok(())
    }

    /// Sets one dotted key.
    pub fn set(&mut self, key: &str, v: &Value) -> Result<()> {
        if let Some((src, field)) = key.split_once('.') {
            if let Some(s) = match src {
                "p1" => Some(&mut self.p1),
                "p2" => Some(&mut self.p2),
                "signal" => Some(&mut self.signal),
                _ => None,
            } {
                match field {
                    "on" => s.on = as_bool(key, v)?,
                    "kind" => s.kind = parse_kind(key, v)?,
                    "power_mw" => s.power = as_f64(key, v)? * 1e-3,
                    "wavelength_nm" => s.wavelength = as_f64(key, v)? * NM,
                    "bandwidth_ghz" => s.bandwidth = as_f64(key, v)? * GHZ,
                    "shape" => s.shape = parse_shape(key, v)?,
                    _ => return Err(Error::UnknownKey(key.to_string())),
                }
                return Ok(());
            }
        }
        match key {
            "case" => {
                self.case = as_str(key, v)?.parse().map_err(|_| {
                    Error::Config(format!("`case` must be one of A, B, C, D, got {v}"))
                })?
            }
            "fiber.length_m" => self.fiber.length = as_f64(key, v)?,
            "fiber.zdw_nm" => self.fiber.zdw = as_f64(key, v)? * NM,
            "fiber.slope_ps_per_km_nm2" => self.fiber.dispersion_slope = as_f64(key, v)? * 1e3,
            "fiber.gamma_per_w_km" => self.fiber.gamma = as_f64(key, v)? * 1e-3,
            "fiber.loss_db_per_km" => self.fiber.loss_db_per_km = as_f64(key, v)?,
            "fiber.raman_fraction" => self.fiber.raman_fraction = as_f64(key, v)?,
            "grid.n_points" => self.grid.n_points = as_u64(key, v)? as usize,
            "grid.time_window_ns" => self.grid.time_window = as_f64(key, v)? * 1e-9,
            "grid.reference_nm" => self.grid.reference_wavelength = as_f64(key, v)? * NM,
            "propagation.dz_m" => self.step.dz = as_f64(key, v)?,
            "propagation.include_raman" => self.step.include_raman = as_bool(key, v)?,
            "propagation.loss_on" => self.step.loss_on = as_bool(key, v)?,
            "raman.kernel" => {
                self.raman_kernel = match as_str(key, v)? {
                    "relaxation" => AnisotropicKernel::Relaxation,
                    "intermediate" => AnisotropicKernel::Intermediate,
                    other => {
                        return Err(Error::Config(format!(
                            "`raman.kernel`: unknown kernel {other:?}"
                        )))
                    }
                }
            }
            "loss.counting_input_db" => self.loss.counting_input_db = as_f64(key, v)?,
            "loss.tap_coupler_db" => self.loss.tap_coupler_db = as_f64(key, v)?,
            "loss.output_coupler_db" => self.loss.output_coupler_db = as_f64(key, v)?,
            "loss.signal_attenuator_db" => self.loss.signal_attenuator_db = as_f64(key, v)?,
            "filter.nbf_bandwidth_ghz" => self.filters.nbf_bandwidth = as_f64(key, v)? * GHZ,
            "filter.nbf_insertion_loss_db" => self.filters.nbf_insertion_loss_db = as_f64(key, v)?,
            "filter.nbf_rejection_db" => self.filters.nbf_rejection_db = as_f64(key, v)?,
            "filter.tunable_bandwidth_ghz" => {
                self.filters.tunable_bandwidth = as_f64(key, v)? * GHZ
            }
            "filter.tunable_insertion_loss_db" => {
                self.filters.tunable_insertion_loss_db = as_f64(key, v)?
            }
            "filter.tunable_rejection_db" => self.filters.tunable_rejection_db = as_f64(key, v)?,
            "detector.efficiency" => self.detector.efficiency = as_f64(key, v)?,
            "detector.gate_ns" => self.detector.gate = as_f64(key, v)? * 1e-9,
            "detector.trigger_rate_hz" => self.detector.trigger_rate = as_f64(key, v)?,
            "detector.dark_prob_per_ns" => self.detector.dark_prob_per_ns = as_f64(key, v)?,
            "ensemble.n_runs" => self.n_runs = as_u64(key, v)? as usize,
            "ensemble.base_seed" => self.base_seed = as_u64(key, v)?,
            "temperature_k" => self.temperature = as_f64(key, v)?,
            "counting.conversion" => {
                self.conversion = match as_str(key, v)? {
                    "coupled-mode" => ConversionPath::CoupledMode,
                    "ssfm" => ConversionPath::Ssfm,
                    other => {
                        return Err(Error::Config(format!(
                        "`counting.conversion` must be \"coupled-mode\" or \"ssfm\", got {other:?}"
                    )))
                    }
                }
            }
            "counting.include_xpm" => self.include_xpm = as_bool(key, v)?,
            "counting.polarizer" => self.polarizer = as_bool(key, v)?,
            "scan.pump_power_mw" => self.scan.pump_power = as_f64(key, v)? * 1e-3,
            "scan.pump_wavelength_nm" => self.scan.pump_wavelength = as_f64(key, v)? * NM,
            "scan.max_detuning_thz" => self.scan.max_detuning = as_f64(key, v)? * 1e12,
            "scan.step_thz" => self.scan.step = as_f64(key, v)? * 1e12,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Every key with its current value in configuration units; parsing
    /// these entries reproduces `self`.
    pub fn entries(&self) -> Vec<(String, Value)> {
        let f = Value::Float;
        let mut out: Vec<(String, Value)> =
            vec![("case".into(), Value::String(self.case.label().into()))];
        for (name, s) in [("p1", &self.p1), ("p2", &self.p2), ("signal", &self.signal)] {
            out.push((format!("{name}.on"), Value::Boolean(s.on)));
            out.push((
                format!("{name}.kind"),
                Value::String(kind_name(s.kind).into()),
            ));
            out.push((format!("{name}.power_mw"), f(s.power * 1e3)));
            out.push((format!("{name}.wavelength_nm"), f(s.wavelength / NM)));
            out.push((format!("{name}.bandwidth_ghz"), f(s.bandwidth / GHZ)));
            out.push((
                format!("{name}.shape"),
                Value::String(shape_name(s.shape).into()),
            ));
        }
        let kernel = match self.raman_kernel {
            AnisotropicKernel::Relaxation => "relaxation",
            AnisotropicKernel::Intermediate => "intermediate",
        };
        let conversion = match self.conversion {
            ConversionPath::CoupledMode => "coupled-mode",
            ConversionPath::Ssfm => "ssfm",
        };
        let rest: Vec<(&str, Value)> = vec![
            ("fiber.length_m", f(self.fiber.length)),
            ("fiber.zdw_nm", f(self.fiber.zdw / NM)),
            (
                "fiber.slope_ps_per_km_nm2",
                f(self.fiber.dispersion_slope * 1e-3),
            ),
            ("fiber.gamma_per_w_km", f(self.fiber.gamma * 1e3)),
            ("fiber.loss_db_per_km", f(self.fiber.loss_db_per_km)),
            ("fiber.raman_fraction", f(self.fiber.raman_fraction)),
            ("grid.n_points", Value::Integer(self.grid.n_points as i64)),
            ("grid.time_window_ns", f(self.grid.time_window * 1e9)),
            ("grid.reference_nm", f(self.grid.reference_wavelength / NM)),
            ("propagation.dz_m", f(self.step.dz)),
            (
                "propagation.include_raman",
                Value::Boolean(self.step.include_raman),
            ),
            ("propagation.loss_on", Value::Boolean(self.step.loss_on)),
            ("raman.kernel", Value::String(kernel.into())),
            ("loss.counting_input_db", f(self.loss.counting_input_db)),
            ("loss.tap_coupler_db", f(self.loss.tap_coupler_db)),
            ("loss.output_coupler_db", f(self.loss.output_coupler_db)),
            (
                "loss.signal_attenuator_db",
                f(self.loss.signal_attenuator_db),
            ),
            (
                "filter.nbf_bandwidth_ghz",
                f(self.filters.nbf_bandwidth / GHZ),
            ),
            (
                "filter.nbf_insertion_loss_db",
                f(self.filters.nbf_insertion_loss_db),
            ),
            ("filter.nbf_rejection_db", f(self.filters.nbf_rejection_db)),
            (
                "filter.tunable_bandwidth_ghz",
                f(self.filters.tunable_bandwidth / GHZ),
            ),
            (
                "filter.tunable_insertion_loss_db",
                f(self.filters.tunable_insertion_loss_db),
            ),
            (
                "filter.tunable_rejection_db",
                f(self.filters.tunable_rejection_db),
            ),
            ("detector.efficiency", f(self.detector.efficiency)),
            ("detector.gate_ns", f(self.detector.gate * 1e9)),
            ("detector.trigger_rate_hz", f(self.detector.trigger_rate)),
            (
                "detector.dark_prob_per_ns",
                f(self.detector.dark_prob_per_ns),
            ),
            ("ensemble.n_runs", Value::Integer(self.n_runs as i64)),
            (
                "ensemble.base_seed",
                Value::String(self.base_seed.to_string()),
            ),
            ("temperature_k", f(self.temperature)),
            ("counting.conversion", Value::String(conversion.into())),
            ("counting.include_xpm", Value::Boolean(self.include_xpm)),
            ("counting.polarizer", Value::Boolean(self.polarizer)),
            ("scan.pump_power_mw", f(self.scan.pump_power * 1e3)),
            ("scan.pump_wavelength_nm", f(self.scan.pump_wavelength / NM)),
            ("scan.max_detuning_thz", f(self.scan.max_detuning * 1e-12)),
            ("scan.step_thz", f(self.scan.step * 1e-12)),
        ];
        out.extend(rest.into_iter().map(|(k, v)| (k.to_string(), v)));
        out
    }

    /// Checks every invariant that does not need a simulation.
    pub fn validate(&self) -> Result<()> {
        self.fiber.validate()?;
        self.detector.validate()?;
        let grid = self.grid.build()?;
        if self.n_runs == 0 {
            return Err(Error::Config("ensemble.n_runs must be at least 1".into()));
        }
        if !(self.step.dz > 0.0) {
            return Err(Error::Config("propagation.dz_m must be positive".into()));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::Config("temperature_k must be positive".into()));
        }
        for (name, s) in [("p1", &self.p1), ("p2", &self.p2), ("signal", &self.signal)] {
            if !(s.power >= 0.0) || !(s.wavelength > 0.0) || !(s.bandwidth >= 0.0) {
                return Err(Error::Config(format!(
                    "{name}: power, wavelength and bandwidth must be non-negative"
                )));
            }
            let off = crate::consts::frequency_of(s.wavelength) - grid.reference_frequency();
            let reach = if s.kind == SourceKind::Ifsfl {
                3.0 * s.bandwidth
            } else {
                0.0
            };
            if off.abs() + reach >= grid.half_span() {
                return Err(Error::Config(format!(
                    "{name} at {:.3} nm does not fit inside the simulation grid",
                    s.wavelength / NM
                )));
            }
            crate::fiber::check_window(s.wavelength)?;
        }
        for (name, db) in [
            ("loss.counting_input_db", self.loss.counting_input_db),
            ("loss.tap_coupler_db", self.loss.tap_coupler_db),
            ("loss.output_coupler_db", self.loss.output_coupler_db),
            ("loss.signal_attenuator_db", self.loss.signal_attenuator_db),
        ] {
            if !(db >= 0.0) {
                return Err(Error::Config(format!("{name} must be >= 0 dB")));
            }
        }
        if !(self.scan.step > 0.0) || !(self.scan.max_detuning >= self.scan.step) {
            return Err(Error::Config(
                "scan.step_thz must be positive and below scan.max_detuning_thz".into(),
            ));
        }
        Ok(())
    }

    pub fn raman_params(&self) -> RamanParams {
        let mut p = match self.raman_kernel {
            AnisotropicKernel::Relaxation => RamanParams::default(),
            AnisotropicKernel::Intermediate => RamanParams::intermediate(),
        };
        p.f_r = self.fiber.raman_fraction;
        p
    }
}
