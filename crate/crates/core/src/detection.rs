//! Output filtering, attenuation and gated photon counting.
//!
//! Filters are ideal rectangular passbands: light inside an element's band
//! sees its insertion loss, light outside sees its rejection. A chain
//! multiplies element transmissions, so rejections add in dB.

use serde::Serialize;

use crate::consts::{db_to_linear, frequency_of, C, H};
use crate::error::{Error, Result};
use crate::ssfm::AveragedSpectrum;

/// Gated single-photon counter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorSpec {
    pub efficiency: f64,
    /// s
    pub gate: f64,
    /// Hz
    pub trigger_rate: f64,
    /// Dark-click probability per nanosecond of open gate.
    pub dark_prob_per_ns: f64,
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self {
            efficiency: 0.10,
            gate: 2.5e-9,
            trigger_rate: 1e5,
            dark_prob_per_ns: 2.7e-6,
        }
    }
}

impl DetectorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::domain(format!(
                "detector efficiency {} outside [0, 1]",
                self.efficiency
            )));
        }
        if !(self.gate > 0.0) || !(self.trigger_rate > 0.0) {
            return Err(Error::domain("gate and trigger rate must be positive"));
        }
        if self.gate * self.trigger_rate > 1.0 {
            return Err(Error::domain(
                "gates overlap: gate · trigger rate exceeds 1",
            ));
        }
        if !(0.0..=1.0).contains(&self.dark_prob_per_ns) {
            return Err(Error::domain("dark probability must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Dark-click probability of one gate, linear in gate length.
    pub fn dark_prob_per_gate(&self) -> f64 {
        (self.dark_prob_per_ns * self.gate * 1e9).min(1.0)
    }

    /// Click rate with no light at all.
    pub fn dark_rate(&self) -> f64 {
        counts_per_second(self.dark_prob_per_gate(), self)
    }
}

/// Mean photon number in one gate, `P·τ·λ/(h·c)`.
pub fn mean_photons_per_gate(power: f64, wavelength: f64, gate: f64) -> f64 {
    (power * gate * wavelength / (H * C)).max(0.0)
}

/// Photon flux (photons/s) to optical power at `wavelength`.
pub fn flux_to_power(flux: f64, wavelength: f64) -> f64 {
    flux * H * C / wavelength
}

/// Threshold-detector click probability for Poissonian light:
/// `1 − (1 − p_dark)·exp(−η·μ)`.
pub fn click_probability(mu: f64, det: &DetectorSpec) -> f64 {
    let dark = det.dark_prob_per_gate();
    // Written as p_d + (1 − p_d)(1 − e^{−x}) to stay accurate for small x.
    let x = det.efficiency * mu.max(0.0);
    dark + (1.0 - dark) * -(-x).exp_m1()
}

pub fn counts_per_second(p: f64, det: &DetectorSpec) -> f64 {
    p.clamp(0.0, 1.0) * det.trigger_rate
}

/// Combined power transmission of attenuators given in dB.
pub fn attenuation(db: &[f64]) -> f64 {
    db_to_linear(-db.iter().sum::<f64>())
}

/// One rectangular bandpass element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterElement {
    pub name: String,
    /// Center wavelength, m.
    pub center: f64,
    /// Full passband width, Hz.
    pub bandwidth: f64,
    pub insertion_loss_db: f64,
    /// Attenuation of out-of-band light, dB.
    pub rejection_db: f64,
}

impl FilterElement {
    pub fn new(
        name: &str,
        center: f64,
        bandwidth: f64,
        insertion_loss_db: f64,
        rejection_db: f64,
    ) -> Self {
        Self {
            name: name.to_string(),
            center,
            bandwidth,
            insertion_loss_db,
            rejection_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center > 0.0) || !(self.bandwidth > 0.0) {
            return Err(Error::domain(format!(
                "filter `{}` needs positive center and bandwidth",
                self.name
            )));
        }
        if !(self.rejection_db >= 0.0) || !(self.insertion_loss_db >= 0.0) {
            return Err(Error::domain(format!(
                "filter `{}` has negative loss",
                self.name
            )));
        }
        Ok(())
    }

    pub fn passes(&self, frequency: f64) -> bool {
        (frequency - frequency_of(self.center)).abs() <= 0.5 * self.bandwidth
    }

    pub fn transmission(&self, frequency: f64) -> f64 {
        if self.passes(frequency) {
            db_to_linear(-self.insertion_loss_db)
        } else {
            db_to_linear(-self.rejection_db)
        }
    }
}

/// A monochromatic line entering a filter chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Line {
    /// Hz
    pub frequency: f64,
    /// W
    pub power: f64,
}

/// Power leaving a chain, split by whether it fell inside the passband.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ChannelPower {
    pub in_band: f64,
    pub leakage: f64,
}

impl ChannelPower {
    pub fn total(&self) -> f64 {
        self.in_band + self.leakage
    }
}

/// Ordered filter elements plus flat losses (couplers, attenuators).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterChain {
    pub elements: Vec<FilterElement>,
    /// Wavelength-independent losses, dB.
    pub flat_losses_db: Vec<f64>,
}

impl FilterChain {
    pub fn new(elements: Vec<FilterElement>) -> Self {
        Self {
            elements,
            flat_losses_db: Vec::new(),
        }
    }

    pub fn with_flat_loss(mut self, db: f64) -> Self {
        self.flat_losses_db.push(db);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.elements.is_empty() {
            return Err(Error::domain("filter chain has no elements"));
        }
        self.elements.iter().try_for_each(FilterElement::validate)
    }

    /// Center of the first element, m.
    pub fn center(&self) -> f64 {
        self.elements.first().map(|e| e.center).unwrap_or(f64::NAN)
    }

    pub fn composite_rejection_db(&self) -> f64 {
        self.elements.iter().map(|e| e.rejection_db).sum()
    }

    /// In-band loss of the whole chain including flat losses, dB.
    pub fn insertion_loss_db(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| e.insertion_loss_db)
            .sum::<f64>()
            + self.flat_losses_db.iter().sum::<f64>()
    }

    pub fn passes(&self, frequency: f64) -> bool {
        self.elements.iter().all(|e| e.passes(frequency))
    }

    pub fn transmission(&self, frequency: f64) -> f64 {
        self.elements
            .iter()
            .map(|e| e.transmission(frequency))
            .product::<f64>()
            * attenuation(&self.flat_losses_db)
    }

    pub fn apply_lines(&self, lines: &[Line]) -> ChannelPower {
        let mut out = ChannelPower::default();
        for line in lines {
            let p = line.power * self.transmission(line.frequency);
            if self.passes(line.frequency) {
                out.in_band += p;
            } else {
                out.leakage += p;
            }
        }
        out
    }

    /// Integrates a spectrum through the chain; every element center must
    /// lie inside the spectrum's span.
    pub fn apply_spectrum(&self, spectrum: &AveragedSpectrum) -> Result<ChannelPower> {
        let (lo, hi) = spectrum.span();
        for e in &self.elements {
            let f = frequency_of(e.center);
            if f < lo || f > hi {
                return Err(Error::domain(format!(
                    "channel `{}` at {:.3} nm lies outside the simulated span",
                    e.name,
                    e.center * 1e9
                )));
            }
        }
        let mut out = ChannelPower::default();
        for (off, psd) in spectrum.frequency_offsets.iter().zip(&spectrum.psd_total) {
            let f = spectrum.reference_frequency + off;
            let p = psd * spectrum.df * self.transmission(f);
            if self.passes(f) {
                out.in_band += p;
            } else {
                out.leakage += p;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::{GHZ, NM};
    use proptest::prelude::*;

    fn idler_chain(rej2: f64) -> FilterChain {
        FilterChain::new(vec![
            FilterElement::new("nbf", 1526.43 * NM, 100.0 * GHZ, 3.0, 60.0),
            FilterElement::new("tunable", 1526.43 * NM, 100.0 * GHZ, 3.0, rej2),
        ])
    }

    #[test]
    fn photons_per_gate_examples() {
        assert_eq!(mean_photons_per_gate(0.0, 1549.2 * NM, 2.5e-9), 0.0);
        // Oracle: 30.8e-9·2.5e-9·1549.2e-9 / (6.62607015e-34·299792458).
        let oracle = 30.8e-9 * 2.5e-9 * 1549.2e-9 / (6.626_070_15e-34 * 299_792_458.0);
        let mu = mean_photons_per_gate(30.8e-9, 1549.2 * NM, 2.5e-9);
        assert!((mu / oracle - 1.0).abs() < 1e-14);
        assert!((mu / 600.0 - 1.0).abs() < 0.01, "{mu}");
        let mu = mean_photons_per_gate(0.257e-9, 1526.43 * NM, 2.5e-9);
        assert!((mu - 5.0).abs() < 0.1, "{mu}");
    }

    #[test]
    fn click_examples() {
        let det = DetectorSpec::default();
        assert!((click_probability(0.0, &det) - 6.75e-6).abs() < 1e-18);
        assert!((click_probability(1e6, &det) - 1.0).abs() < 1e-15);
        let p = click_probability(5.0, &det);
        assert!((p - 0.3935).abs() < 1e-4, "{p}");
        assert!((counts_per_second(p, &det) - 3.935e4).abs() < 10.0);
        assert!((det.dark_rate() - 0.675).abs() < 1e-12);
        assert_eq!(counts_per_second(1.0, &det), 1e5);
    }

    #[test]
    fn detector_validation() {
        assert!(DetectorSpec::default().validate().is_ok());
        let bad = DetectorSpec {
            efficiency: 1.2,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = DetectorSpec {
            gate: 2e-5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn pump_leakage_through_hundred_db() {
        let chain = idler_chain(40.0);
        assert_eq!(chain.composite_rejection_db(), 100.0);
        let out = chain.apply_lines(&[Line {
            frequency: frequency_of(1540.7 * NM),
            power: 0.022,
        }]);
        assert_eq!(out.in_band, 0.0);
        assert!((out.leakage - 2.2e-12).abs() < 1e-24, "{}", out.leakage);
    }

    #[test]
    fn infinite_rejection_keeps_in_band_only() {
        let chain = idler_chain(f64::INFINITY);
        let out = chain.apply_lines(&[
            Line {
                frequency: frequency_of(1540.7 * NM),
                power: 1.0,
            },
            Line {
                frequency: frequency_of(1526.43 * NM),
                power: 1e-6,
            },
        ]);
        assert_eq!(out.leakage, 0.0);
        assert!((out.in_band - 1e-6 * db_to_linear(-6.0)).abs() < 1e-20);
    }

    #[test]
    fn spectrum_integration_and_span_check() {
        let n = 64;
        let df = 50e9;
        let f0 = frequency_of(1526.43 * NM);
        let offsets: Vec<f64> = (0..n).map(|k| (k as f64 - 32.0) * df).collect();
        let spec = AveragedSpectrum {
            reference_frequency: f0,
            df,
            frequency_offsets: offsets,
            psd_x: vec![1e-12; n],
            psd_y: vec![0.0; n],
            psd_total: vec![1e-12; n],
            n_runs: 1,
        };
        let chain = idler_chain(40.0);
        let out = chain.apply_spectrum(&spec).unwrap();
        // Bins at −50, 0, +50 GHz lie inside the ±50 GHz passband.
        assert!((out.in_band - 3.0 * 1e-12 * df * db_to_linear(-6.0)).abs() < 1e-15);
        assert!((out.leakage - 61.0 * 1e-12 * df * 1e-10).abs() < 1e-18);
        let far = FilterChain::new(vec![FilterElement::new(
            "x",
            1400.0 * NM,
            100.0 * GHZ,
            3.0,
            60.0,
        )]);
        assert!(matches!(far.apply_spectrum(&spec), Err(Error::Domain(_))));
    }

    #[test]
    fn signal_budget_gives_about_six_hundred() {
        // 25.6 dB input (which already contains the 13 dB tap), 9 dB of
        // coupler and filters, 18 dB attenuator.
        let p = 5e-3 * attenuation(&[25.6, 13.0, 9.0, 18.0]);
        let mu = mean_photons_per_gate(p, 1549.2 * NM, 2.5e-9);
        assert!(mu > 20.0 && mu < 30.0, "{mu}");
        let p = 5e-3 * attenuation(&[25.6, 9.0, 18.0]);
        let mu = mean_photons_per_gate(p, 1549.2 * NM, 2.5e-9);
        assert!(mu > 300.0 && mu < 1200.0, "{mu}");
    }

    proptest! {
        #[test]
        fn attenuators_compose(x in 0.0f64..80.0, y in 0.0f64..80.0) {
            let a = attenuation(&[x]) * attenuation(&[y]);
            let b = attenuation(&[x + y]);
            prop_assert!((a / b - 1.0).abs() < 1e-12);
        }

        #[test]
        fn click_monotone(mu in 0.0f64..1e3, d in 0.0f64..1e2, eff in 0.0f64..1.0) {
            let det = DetectorSpec { efficiency: eff, ..Default::default() };
            let p = click_probability(mu, &det);
            prop_assert!(click_probability(mu + d, &det) >= p);
            let det2 = DetectorSpec { efficiency: (eff + 0.1).min(1.0), ..det };
            prop_assert!(click_probability(mu, &det2) >= p);
            let det3 = DetectorSpec { dark_prob_per_ns: det.dark_prob_per_ns * 2.0, ..det };
            prop_assert!(click_probability(mu, &det3) >= p);
            prop_assert!(counts_per_second(p, &det) <= det.trigger_rate);
        }

        #[test]
        fn photons_linear(p in 0.0f64..1e-3, a in 0.0f64..100.0) {
            let m1 = mean_photons_per_gate(a * p, 1549.2e-9, 2.5e-9);
            let m2 = a * mean_photons_per_gate(p, 1549.2e-9, 2.5e-9);
            prop_assert!((m1 - m2).abs() <= 1e-12 * m2.abs().max(1e-300));
        }
    }
}
