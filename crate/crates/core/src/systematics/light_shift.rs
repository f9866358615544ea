//! Upper bounds on the light-shift channels.
//!
//! Both bounds convert a differential arm phase into acceleration through
//! the scale factor n·k_eff·T². The arm phase of one pulse comes from the
//! off-resonant coupling to the neighbouring ladder orders, which differs
//! between the arms once the momentum class sits off the Bragg resonance by
//! one momentum standard deviation.

use std::f64::consts::PI;

use super::{Channel, SystematicShift};
use crate::bragg::{signed_two_photon_coupling, two_photon_rabi_slope, LaserField};
use crate::model::{HyperfineState, InterferometerConfig, PhysicalConstants};
use crate::{Error, Result};

/// Gradient fraction used for the budget when none is configured.
pub const DEFAULT_GRADIENT_FRACTION: f64 = 1e-6;
/// Pulse-1/pulse-3 intensity imbalance used for the budget by default.
pub const DEFAULT_IMBALANCE_FRACTION: f64 = 5e-4;

fn pulse_duration(config: &InterferometerConfig) -> f64 {
    config.pi_pulse_sigma() * (2.0 * PI).sqrt()
}

/// Differential light shift between the two arms accumulated over one pulse
/// (rad) for peak two-photon Rabi frequency `rabi`. The π pulse swaps the
/// arms halfway and cancels its own contribution, so callers pass the
/// beam-splitter Rabi frequency.
pub fn arm_phase(rabi: f64, config: &InterferometerConfig, constants: &PhysicalConstants) -> f64 {
    let n = config.bragg_order as f64;
    let spacing = 4.0 * constants.recoil_omega * (n + 1.0);
    let offset = 4.0 * constants.recoil_omega * config.momentum_sigma();
    let shift = (0.5 * rabi).powi(2) * (1.0 / (spacing - offset) - 1.0 / (spacing + offset));
    shift * pulse_duration(config)
}

/// Bound from a spatial intensity gradient across the arms and from an
/// intensity change between the first and last pulses.
pub fn ac_stark_bound(
    gradient_fraction: f64,
    imbalance_fraction: f64,
    peak_rabi: f64,
    intensity_ratio: f64,
    config: &InterferometerConfig,
    constants: &PhysicalConstants,
) -> Result<SystematicShift> {
    for (name, v) in [("gradient", gradient_fraction), ("imbalance", imbalance_fraction)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!("{name} fraction must lie in [0, 1]")));
        }
    }
    if !(peak_rabi >= 0.0) || !(intensity_ratio > 0.0) {
        return Err(Error::InvalidInput("Rabi frequency and intensity ratio must be positive".into()));
    }
    // single-photon shift of both beams: Ω_eff·(r + 1)/(2√r)
    let single = peak_rabi * (intensity_ratio + 1.0) / (2.0 * intensity_ratio.sqrt());
    let gradient_phase = 2.0 * single * pulse_duration(config) * gradient_fraction;
    let imbalance_phase = arm_phase(peak_rabi, config, constants) * imbalance_fraction;
    Ok(SystematicShift {
        channel: Channel::AcStark,
        value: (gradient_phase + imbalance_phase) / (config.scale_factor() * constants.g_nominal),
        uncertainty: 0.0,
        note: Some(format!(
            "upper bound; gradient fraction {gradient_fraction}, pulse imbalance {imbalance_fraction}"
        )),
    })
}

/// Bound from a laser frequency error `freq_error` (Hz, signed) away from the
/// balanced detuning. The two states then see different Rabi frequencies and
/// different arm phases; first order in the error.
pub fn two_photon_light_shift_bound(
    freq_error: f64,
    balanced: &LaserField,
    peak_rabi: f64,
    config: &InterferometerConfig,
    constants: &PhysicalConstants,
) -> Result<SystematicShift> {
    if !freq_error.is_finite() {
        return Err(Error::InvalidInput("frequency error must be finite".into()));
    }
    // relative slope d ln|Ω_F| / dΔ for each state
    let rel = |s: HyperfineState| -> Result<f64> {
        Ok(two_photon_rabi_slope(s, balanced, constants)? / signed_two_photon_coupling(s, balanced, constants)?.abs())
    };
    let d_rel = rel(HyperfineState::F1)? - rel(HyperfineState::F2)?;
    // arm phase scales with Ω²
    let phase = 2.0 * arm_phase(peak_rabi, config, constants) * d_rel * freq_error;
    Ok(SystematicShift {
        channel: Channel::TwoPhotonLightShift,
        value: phase / (config.scale_factor() * constants.g_nominal),
        uncertainty: 0.0,
        note: Some(format!("frequency error {freq_error} Hz from the balanced detuning")),
    })
}
