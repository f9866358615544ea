//! Overlapping Allan deviation.

use serde::Serialize;

use crate::{par, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllanSeries {
    pub taus: Vec<f64>,
    pub deviations: Vec<f64>,
    /// Number of second differences behind each point.
    pub terms: Vec<usize>,
    /// Amplitude a of σ(τ) = a·τ^(−1/2) over the white-noise region.
    pub slope_fit: f64,
    /// Free log-log slope over the same region, if it has ≥ 2 points.
    pub slope_exponent: Option<f64>,
    /// Largest τ used in the fits (s).
    pub fit_max_tau: f64,
    /// Requested taus dropped for lack of data.
    pub omitted: Vec<f64>,
}

impl AllanSeries {
    pub fn at(&self, tau: f64) -> Option<f64> {
        self.taus
            .iter()
            .position(|t| (t - tau).abs() <= 1e-9 * tau)
            .map(|i| self.deviations[i])
    }
}

/// Octave-spaced averaging times up to the longest with at least one
/// second difference.
pub fn octave_taus(len: usize, sample_interval: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut m = 1usize;
    while 2 * m < len {
        out.push(m as f64 * sample_interval);
        m *= 2;
    }
    out
}

/// EDF of the overlapping estimator for white noise.
fn white_edf(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (3.0 * (n - 1.0) / (2.0 * m) - 2.0 * (n - 2.0) / n) * 4.0 * m * m / (4.0 * m * m + 5.0)
}

/// Overlapping Allan deviation of `series` (sampled every `sample_interval`
/// seconds) at each requested τ, rounded to a multiple of the interval.
pub fn allan_deviation(series: &[f64], sample_interval: f64, taus: &[f64]) -> Result<AllanSeries> {
    if !(sample_interval > 0.0) {
        return Err(Error::InvalidInput("sample interval must be positive".into()));
    }
    let n = series.len();
    if n < 3 {
        return Err(Error::InsufficientData("Allan deviation needs at least 3 samples".into()));
    }
    // integrated series relative to the first sample; shifting by a constant
    // leaves the estimator unchanged and keeps a constant input exactly zero
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    let mut acc = 0.0;
    for v in series {
        acc += v - series[0];
        x.push(acc);
    }

    let mut ms: Vec<usize> = Vec::new();
    let mut omitted = Vec::new();
    for &tau in taus {
        let m = (tau / sample_interval).round() as usize;
        if m == 0 || 2 * m > n {
            omitted.push(tau);
        } else if !ms.contains(&m) {
            ms.push(m);
        }
    }
    ms.sort_unstable();
    if ms.is_empty() {
        return Err(Error::InsufficientData("no requested τ fits within the series".into()));
    }

    let devs = par::map_slice(&ms, |&m| {
        let terms = n + 1 - 2 * m;
        let sum: f64 = (0..terms)
            .map(|i| {
                let d = x[i + 2 * m] - 2.0 * x[i + m] + x[i];
                d * d
            })
            .sum();
        ((sum / (2.0 * (m * m) as f64 * terms as f64)).sqrt(), terms)
    });

    let taus: Vec<f64> = ms.iter().map(|&m| m as f64 * sample_interval).collect();
    let deviations: Vec<f64> = devs.iter().map(|d| d.0).collect();

    // white-noise region: averaging windows up to a tenth of the record
    let region: Vec<usize> = (0..ms.len()).filter(|&i| ms[i] * 10 <= n).collect();
    let region = if region.is_empty() { vec![0] } else { region };
    let w: Vec<f64> = region.iter().map(|&i| white_edf(n, ms[i]).max(1.0)).collect();
    let wsum: f64 = w.iter().sum();
    let all_positive = region.iter().all(|&i| deviations[i] > 0.0);
    let slope_fit = if all_positive {
        let log_a: f64 = region
            .iter()
            .zip(&w)
            .map(|(&i, w)| w * (deviations[i].ln() + 0.5 * taus[i].ln()))
            .sum::<f64>()
            / wsum;
        log_a.exp()
    } else {
        (region.iter().zip(&w).map(|(&i, w)| w * deviations[i].powi(2) * taus[i]).sum::<f64>() / wsum).sqrt()
    };
    let slope_exponent = if all_positive && region.len() >= 2 {
        let lx: Vec<f64> = region.iter().map(|&i| taus[i].ln()).collect();
        let ly: Vec<f64> = region.iter().map(|&i| deviations[i].ln()).collect();
        let mx = lx.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / wsum;
        let my = ly.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / wsum;
        let sxy: f64 = lx.iter().zip(&ly).zip(&w).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
        let sxx: f64 = lx.iter().zip(&w).map(|(x, w)| w * (x - mx).powi(2)).sum();
        Some(sxy / sxx)
    } else {
        None
    };

    Ok(AllanSeries {
        fit_max_tau: taus[*region.last().unwrap()],
        taus,
        deviations,
        terms: devs.iter().map(|d| d.1).collect(),
        slope_fit,
        slope_exponent,
        omitted,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    use super::*;

    /// Direct average-of-averages form, O(N·m).
    fn brute_adev(y: &[f64], m: usize) -> f64 {
        let avg = |i: usize| y[i..i + m].iter().sum::<f64>() / m as f64;
        let terms = y.len() + 1 - 2 * m;
        let s: f64 = (0..terms).map(|i| (avg(i + m) - avg(i)).powi(2)).sum();
        (s / (2.0 * terms as f64)).sqrt()
    }

    #[test]
    fn constant_series_is_zero() {
        let y = vec![0.1; 1000];
        let a = allan_deviation(&y, 1.0, &octave_taus(1000, 1.0)).unwrap();
        assert!(a.deviations.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn matches_direct_estimator() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nrm = Normal::new(0.0, 1.0).unwrap();
        let y: Vec<f64> = (0..500).map(|_| nrm.sample(&mut rng)).collect();
        let a = allan_deviation(&y, 2.0, &[2.0, 6.0, 40.0, 200.0]).unwrap();
        for (tau, d) in a.taus.iter().zip(&a.deviations) {
            let b = brute_adev(&y, (tau / 2.0) as usize);
            assert!((d - b).abs() < 1e-12 * b, "{tau}: {d} {b}");
        }
    }

    #[test]
    fn white_noise_follows_inverse_sqrt() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = 2.5;
        let nrm = Normal::new(0.0, s).unwrap();
        let n = 200_000;
        let y: Vec<f64> = (0..n).map(|_| nrm.sample(&mut rng)).collect();
        let a = allan_deviation(&y, 1.0, &octave_taus(n, 1.0)).unwrap();
        for (tau, d) in a.taus.iter().zip(&a.deviations) {
            if *tau <= n as f64 / 10.0 && *tau <= 1024.0 {
                assert!((d / (s / tau.sqrt()) - 1.0).abs() < 0.05, "{tau}: {d}");
            }
        }
        assert!((a.slope_fit / s - 1.0).abs() < 0.02);
        assert!((a.slope_exponent.unwrap() + 0.5).abs() < 0.05);
    }

    #[test]
    fn linear_drift_scales_with_tau() {
        let y: Vec<f64> = (0..1000).map(|i| 1e-3 * i as f64).collect();
        let a = allan_deviation(&y, 1.0, &[4.0, 8.0, 16.0]).unwrap();
        // σ(τ) = drift·τ/√2
        for (tau, d) in a.taus.iter().zip(&a.deviations) {
            assert!((d / (1e-3 * tau / 2f64.sqrt()) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn long_taus_omitted() {
        let y = vec![1.0, 2.0, 0.5, 0.7, 1.1, 0.2];
        let a = allan_deviation(&y, 1.0, &[1.0, 2.0, 3.0, 4.0, 10.0]).unwrap();
        assert_eq!(a.omitted, vec![4.0, 10.0]);
        assert_eq!(a.terms, vec![5, 3, 1]);
        assert!(allan_deviation(&y, 1.0, &[10.0]).is_err());
    }
}
