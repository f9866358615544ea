//! Detection, fitting and averaging.

mod allan;
mod fringe_fit;
pub(crate) mod linalg;
mod raman;

pub use allan::{allan_deviation, octave_taus, AllanSeries};
pub use fringe_fit::{sine_fringe_fit, FringeFit};
pub(crate) use fringe_fit::wrap_phase;
pub use raman::{doppler_separation, population_from_two_samples, simulate_raman_spectrum, RamanSpectrum};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub uncertainty: f64,
}

impl Estimate {
    pub fn new(value: f64, uncertainty: f64) -> Self {
        Self { value, uncertainty }
    }
}

/// Inverse-variance weighted mean and the standard deviation of that mean.
pub fn weighted_mean(values: &[f64], uncertainties: &[f64]) -> Result<Estimate> {
    if values.is_empty() {
        return Err(Error::InsufficientData("weighted mean of an empty set".into()));
    }
    if values.len() != uncertainties.len() {
        return Err(Error::InvalidInput("values and uncertainties differ in length".into()));
    }
    if uncertainties.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidInput("uncertainties must be positive and finite".into()));
    }
    let (mut sw, mut swx) = (0.0, 0.0);
    for (x, s) in values.iter().zip(uncertainties) {
        let w = 1.0 / (s * s);
        sw += w;
        swx += w * x;
    }
    Ok(Estimate::new(swx / sw, sw.sqrt().recip()))
}

/// Arithmetic mean with the standard error √(var/N) (sample variance).
pub fn mean_and_error(values: &[f64]) -> Result<Estimate> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData("need at least two values".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(Estimate::new(mean, (var / n as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_uncertainties_give_arithmetic_mean() {
        let e = weighted_mean(&[1.0, 2.0, 6.0, 3.0], &[0.5; 4]).unwrap();
        assert!((e.value - 3.0).abs() < 1e-15);
        assert!((e.uncertainty - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dominant_point_wins() {
        let e = weighted_mean(&[1.0, 5.0, -2.0], &[1.0, 1e-9, 1.0]).unwrap();
        assert!((e.value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bad_inputs() {
        assert!(weighted_mean(&[], &[]).is_err());
        assert!(weighted_mean(&[1.0], &[0.0]).is_err());
        assert!(weighted_mean(&[1.0, 2.0], &[1.0]).is_err());
    }
}
