//! `fwmlab` command-line tool.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fwmlab::coupled_mode::CouplingTable;
use fwmlab::harness::{
    self, parse_range_nm, run_bs_sweep, run_counting_experiment, run_raman_scan,
    run_spectrum_experiment, RunManifest,
};
use fwmlab::{Error, PolarizationCase, Result, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "fwmlab",
    version,
    about = "Dual-pump Bragg-scattering FWM simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML, flat dotted keys). Defaults reproduce the reference lab setup.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the polarization case (A, B, C or D).
    #[arg(long)]
    case: Option<PolarizationCase>,
    /// Override the ensemble base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; standard output when omitted. A `.manifest.json` is
    /// written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Ensemble-averaged output spectrum.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Number of ensemble runs.
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Gated counts of both channels under the four toggle conditions.
    Counts {
        #[command(flatten)]
        common: Common,
    },
    /// Parallel and perpendicular Raman gain around a single pump.
    RamanScan {
        #[command(flatten)]
        common: Common,
    },
    /// Coupled-mode BS efficiency versus signal wavelength.
    BsSweep {
        #[command(flatten)]
        common: Common,
        /// Signal wavelengths in nm as start:stop:step.
        #[arg(long, default_value = "1530:1560:0.5")]
        signal_nm: String,
    },
    /// Check a configuration without running a simulation.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::from_file(path)?,
        None => ScenarioConfig::default(),
    };
    cfg.apply_env(std::env::vars())?;
    if let Some(case) = common.case {
        cfg.case = case;
    }
    if let Some(seed) = common.seed {
        cfg.base_seed = seed;
    }
    Ok(cfg)
}

fn with_output<F>(out: Option<&Path>, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_manifest(common: &Common, mut manifest: RunManifest) -> Result<()> {
    if let Some(out) = &common.out {
        manifest.outputs.push(out.display().to_string());
        let file = File::create(manifest_path(out))?;
        manifest.write(BufWriter::new(file))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Spectrum { common, runs } => {
            let mut cfg = load(&common)?;
            if let Some(n) = runs {
                cfg.n_runs = n;
            }
            let report = run_spectrum_experiment(&cfg)?;
            with_output(common.out.as_deref(), |w| {
                harness::write_spectrum_csv(w, &report.spectrum)
            })?;
            let mut m = RunManifest::new("spectrum", &cfg);
            m.seeds = report.seeds.clone();
            m.details =
                serde_json::json!({ "markers": report.markers, "n_runs": report.spectrum.n_runs });
            write_manifest(&common, m)
        }
        Command::Counts { common } => {
            let cfg = load(&common)?;
            let report = run_counting_experiment(&cfg)?;
            with_output(common.out.as_deref(), |w| {
                harness::write_counts_csv(w, &report)
            })?;
            let mut m = RunManifest::new("counts", &cfg);
            m.details = serde_json::to_value(&report).map_err(|e| Error::Io(e.into()))?;
            write_manifest(&common, m)
        }
        Command::RamanScan { common } => {
            let cfg = load(&common)?;
            let curve = run_raman_scan(&cfg)?;
            with_output(common.out.as_deref(), |w| {
                harness::write_raman_csv(w, &curve)
            })?;
            write_manifest(&common, RunManifest::new("raman-scan", &cfg))
        }
        Command::BsSweep { common, signal_nm } => {
            let cfg = load(&common)?;
            let grid = parse_range_nm(&signal_nm)?;
            let rows = run_bs_sweep(&cfg, &grid, cfg.case)?;
            with_output(common.out.as_deref(), |w| {
                harness::write_sweep_csv(w, &rows)
            })?;
            let mut m = RunManifest::new("bs-sweep", &cfg);
            m.details = serde_json::json!({ "signal_nm": signal_nm });
            write_manifest(&common, m)
        }
        Command::Validate { common } => {
            let cfg = load(&common)?;
            validate(&cfg)
        }
    }
}

/// Configuration checks plus the cheap invariants of the analytic models.
fn validate(cfg: &ScenarioConfig) -> Result<()> {
    cfg.validate()?;
    println!("ok  configuration");
    let table = CouplingTable::standard();
    let expected = [(1.0, true), (0.5, false), (0.5, false), (0.0, true)];
    for ((case, c), (bs, dfwm)) in table.rows.iter().zip(expected) {
        if c.bs_factor != bs || c.dfwm_active() != dfwm {
            return Err(Error::Config(format!(
                "coupling table wrong for case {case}"
            )));
        }
    }
    println!("ok  coupling table");
    let report = harness::counting_for_case(cfg, cfg.case, None)?;
    for row in &report.rows {
        if row.clicks_per_s > cfg.detector.trigger_rate || !row.mu_per_gate.is_finite() {
            return Err(Error::Config(format!(
                "count model out of range for {} {}",
                row.channel.label(),
                row.condition.label()
            )));
        }
    }
    println!("ok  counting model ({} rows)", report.rows.len());
    let curve = run_raman_scan(cfg)?;
    let odd = curve
        .r_parallel
        .iter()
        .zip(curve.r_parallel.iter().rev())
        .all(|(a, b)| (a + b).abs() <= 1e-12 * a.abs().max(b.abs()));
    if !odd {
        return Err(Error::Config("Raman gain is not odd in detuning".into()));
    }
    println!("ok  raman scan ({} detunings)", curve.detuning_hz.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fwmlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
