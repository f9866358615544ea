//! Doppler-sensitive Raman readout of the two momentum classes.

use serde::Serialize;

use crate::model::PhysicalConstants;
use crate::{Error, Result};

/// FWHM → Gaussian σ.
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RamanSpectrum {
    /// Offsets from the |p₀⟩ line (rad/s).
    pub frequency_offsets: Vec<f64>,
    pub responses: Vec<f64>,
    /// Line FWHM (rad/s).
    pub linewidth: f64,
    /// Line centres of |p₀⟩ and |p₀ + 2ħk⟩ (rad/s).
    pub peaks: [f64; 2],
    pub populations: [f64; 2],
}

impl RamanSpectrum {
    /// Fluorescence response at `offset`.
    pub fn response_at(&self, offset: f64) -> f64 {
        let s = self.linewidth / FWHM_PER_SIGMA;
        self.peaks
            .iter()
            .zip(self.populations)
            .map(|(c, p)| p * (-0.5 * ((offset - c) / s).powi(2)).exp())
            .sum()
    }

    pub fn peak_separation(&self) -> f64 {
        self.peaks[1] - self.peaks[0]
    }
}

/// Doppler splitting between |p₀⟩ and |p₀ + 2ħk⟩ for a counter-propagating
/// Raman probe: k_eff · 2ħk/m = 8ω_r (rad/s).
pub fn doppler_separation(constants: &PhysicalConstants) -> f64 {
    let k_eff = 2.0 * constants.wavenumber;
    k_eff * constants.bragg_recoil_velocity(1)
}

/// Two Gaussian lines with areas set by the populations, sampled on a grid
/// covering both peaks.
pub fn simulate_raman_spectrum(
    pop_p0: f64,
    pop_p2: f64,
    constants: &PhysicalConstants,
    linewidth: f64,
) -> Result<RamanSpectrum> {
    if !(pop_p0 >= 0.0 && pop_p2 >= 0.0 && pop_p0 + pop_p2 <= 1.0 + 1e-12) {
        return Err(Error::InvalidInput("populations must be non-negative and sum to at most 1".into()));
    }
    if !(linewidth > 0.0) {
        return Err(Error::InvalidInput("linewidth must be positive".into()));
    }
    let sep = doppler_separation(constants);
    let lo = -5.0 * linewidth;
    let hi = sep + 5.0 * linewidth;
    let n = 4001;
    let mut spec = RamanSpectrum {
        frequency_offsets: (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        responses: Vec::new(),
        linewidth,
        peaks: [0.0, sep],
        populations: [pop_p0, pop_p2],
    };
    spec.responses = spec.frequency_offsets.iter().map(|&f| spec.response_at(f)).collect();
    Ok(spec)
}

/// P(|p₀ + 2ħk⟩) from the responses at the two fixed probe frequencies.
pub fn population_from_two_samples(response_peak1: f64, response_peak2: f64) -> Result<f64> {
    if !(response_peak1 >= 0.0 && response_peak2 >= 0.0) {
        return Err(Error::InvalidInput("responses must be non-negative".into()));
    }
    let total = response_peak1 + response_peak2;
    if total == 0.0 {
        return Err(Error::UndefinedProbability);
    }
    Ok(response_peak2 / total)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    use super::*;
    use crate::model::rb87_constants;

    const KHZ: f64 = 2.0 * PI * 1e3;

    #[test]
    fn separation_is_about_30_khz() {
        let c = rb87_constants();
        let sep = doppler_separation(&c) / KHZ;
        // 8·ω_r/2π from an independent ħk²/2m evaluation
        let k = 2.0 * PI / 780.241_209_686e-9;
        let wr = 1.054_571_817e-34 * k * k / (2.0 * 1.443_160_648e-25);
        assert!((sep - 8.0 * wr / KHZ).abs() < 1e-9);
        assert!((sep - 30.0).abs() < 0.5, "{sep}");
    }

    #[test]
    fn equal_populations_equal_peaks() {
        let c = rb87_constants();
        let s = simulate_raman_spectrum(0.5, 0.5, &c, 0.3 * KHZ).unwrap();
        assert!((s.response_at(s.peaks[0]) - s.response_at(s.peaks[1])).abs() < 1e-15);
    }

    #[test]
    fn narrow_lines_are_resolved() {
        let c = rb87_constants();
        let s = simulate_raman_spectrum(0.5, 0.5, &c, 0.3 * KHZ).unwrap();
        let valley = s.response_at(0.5 * s.peak_separation());
        assert!(valley < 0.1 * s.response_at(s.peaks[0]));
    }

    #[test]
    fn two_sample_estimator() {
        assert_eq!(population_from_two_samples(0.3, 0.3).unwrap(), 0.5);
        assert_eq!(population_from_two_samples(0.7, 0.0).unwrap(), 0.0);
        assert_eq!(population_from_two_samples(0.0, 0.0), Err(Error::UndefinedProbability));
        assert!(population_from_two_samples(-0.1, 0.2).is_err());
    }

    #[test]
    fn noiseless_round_trip_is_identity() {
        let c = rb87_constants();
        for i in 1..10 {
            let p = 0.1 * i as f64;
            let s = simulate_raman_spectrum(1.0 - p, p, &c, 0.3 * KHZ).unwrap();
            let r = population_from_two_samples(s.response_at(s.peaks[0]), s.response_at(s.peaks[1])).unwrap();
            assert!((r - p).abs() < 1e-9, "{p} {r}");
        }
    }

    #[test]
    fn noisy_round_trip_within_detection_noise() {
        let c = rb87_constants();
        let sigma = 0.01;
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 1..10 {
            let p = 0.1 * i as f64;
            let s = simulate_raman_spectrum(1.0 - p, p, &c, 0.3 * KHZ).unwrap();
            let n = 400;
            let mean = (0..n)
                .map(|_| {
                    let r1 = (s.response_at(s.peaks[0]) + noise.sample(&mut rng)).max(0.0);
                    let r2 = (s.response_at(s.peaks[1]) + noise.sample(&mut rng)).max(0.0);
                    population_from_two_samples(r1, r2).unwrap()
                })
                .sum::<f64>()
                / n as f64;
            // single-sample scatter ≤ √2·σ, so the mean is well inside 5σ/√n
            assert!((mean - p).abs() < 5.0 * 1.5 * sigma / (n as f64).sqrt(), "{p} {mean}");
        }
    }
}
