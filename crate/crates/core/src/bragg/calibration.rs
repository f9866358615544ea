use serde::{Deserialize, Serialize};

use super::ladder::{propagate_pulse, MomentumLadderState, PulseWaveform};
use super::roots::{brent_root, golden_max};
use crate::model::{InterferometerConfig, PhysicalConstants};
use crate::{par, Error, Result};

/// π and π/2 waveforms sharing one σ. The π/2 amplitude is solved for an
/// exact 50/50 split; its area is close to half the π area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedPulses {
    pub pi: PulseWaveform,
    pub half_pi: PulseWaveform,
    /// Transfer of the π pulse for a resonant atom with no momentum spread.
    pub zero_spread_transfer: f64,
}

/// Population in |p₀ + 2nħk⟩ after one pulse, starting from |p₀⟩, for an
/// atom whose momentum is off resonance by `momentum_offset` ħk.
pub fn transfer_at(
    pulse: &PulseWaveform,
    config: &InterferometerConfig,
    constants: &PhysicalConstants,
    momentum_offset: f64,
) -> Result<f64> {
    let psi = MomentumLadderState::ground(config.ladder_half_size, 0.0);
    let doppler = 4.0 * constants.recoil_omega * momentum_offset;
    let out = propagate_pulse(&psi, pulse, config, constants, doppler)?;
    Ok(out.population(config.bragg_order as i64))
}

/// Finds Ω_peak that maximises resonant transfer for a pulse of width σ.
pub fn calibrate_pi_pulse(
    sigma: f64,
    config: &InterferometerConfig,
    constants: &PhysicalConstants,
) -> Result<CalibratedPulses> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput("pulse σ must be positive".into()));
    }
    config.validate()?;
    // first-order Bragg: the two-level area-π guess
    let guess = std::f64::consts::PI / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let transfer = |peak: f64| transfer_at(&PulseWaveform::gaussian(sigma, peak), config, constants, 0.0);
    let (lo, hi) = (0.6 * guess, 1.6 * guess);
    let (peak, best) = golden_max(transfer, lo, hi, 1e-6, 200)?;
    if (peak - lo) / guess < 1e-3 || (hi - peak) / guess < 1e-3 {
        return Err(Error::Calibration(format!("optimum {peak:e} rad/s sits on the search boundary")));
    }
    if best < 0.5 {
        return Err(Error::Calibration(format!("best transfer {best} is below one half")));
    }
    let pi = PulseWaveform::gaussian(sigma, peak);
    // off-resonant orders shift the optimum away from area π, so halving the
    // area alone leaves the splitter slightly unbalanced
    let half_peak = brent_root(
        |p| Ok(transfer(p)? - 0.5),
        0.3 * peak,
        0.7 * peak,
        1e-9 * peak,
        1e-12,
        200,
    )
    .map_err(|_| Error::Calibration("no 50/50 splitter amplitude found".into()))?;
    Ok(CalibratedPulses {
        pi,
        half_pi: PulseWaveform::gaussian(sigma, half_peak),
        zero_spread_transfer: best,
    })
}

impl CalibratedPulses {
    /// Calibrates at the configured π-pulse width.
    pub fn for_config(config: &InterferometerConfig, constants: &PhysicalConstants) -> Result<Self> {
        calibrate_pi_pulse(config.pi_pulse_sigma(), config, constants)
    }
}

/// Transfer averaged over a Gaussian momentum distribution.
///
/// `momentum_width` is the ±1σ full width in ħk (σ = width/2). The average
/// uses a `samples`-point midpoint rule on ±5σ with Gaussian weights.
pub fn diffraction_efficiency(
    pulse: &PulseWaveform,
    momentum_width: f64,
    samples: usize,
    config: &InterferometerConfig,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if samples < 100 {
        return Err(Error::InvalidInput("efficiency average needs at least 100 samples".into()));
    }
    if momentum_width < 0.0 {
        return Err(Error::InvalidInput("momentum width must be non-negative".into()));
    }
    if momentum_width == 0.0 {
        return transfer_at(pulse, config, constants, 0.0);
    }
    let sigma = 0.5 * momentum_width;
    let span = 10.0 * sigma;
    let nodes: Vec<(f64, f64)> = (0..samples)
        .map(|i| {
            let x = -5.0 * sigma + span * (i as f64 + 0.5) / samples as f64;
            (x, (-0.5 * x * x / (sigma * sigma)).exp())
        })
        .collect();
    let transfers = par::map_slice(&nodes, |&(x, _)| transfer_at(pulse, config, constants, x));
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, (_, w)) in transfers.into_iter().zip(&nodes) {
        num += t? * w;
        den += w;
    }
    Ok(num / den)
}
