use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::roots::brent_root;
use crate::model::{HyperfineState, PhysicalConstants};
use crate::{Error, Result};

/// D2 natural linewidth Γ (rad/s).
pub const D2_LINEWIDTH: f64 = 2.0 * PI * 6.0666e6;
/// Far-detuned D2 saturation intensity (W/m²), 2.50399 mW/cm².
pub const SATURATION_INTENSITY: f64 = 25.0399;

/// Search bracket (Hz, relative to F=2 → F'=3) for the balanced detuning:
/// between the F=2 and F=1 manifolds, clear of every line.
pub const DEFAULT_BRACKET_HZ: (f64, f64) = (0.5e9, 6.0e9);

/// Relative hyperfine transition strengths S_FF' of the D2 line, indexed by
/// F' = 0..3. They sum to one for each ground level.
fn strength(state: HyperfineState) -> [f64; 4] {
    match state {
        HyperfineState::F1 => [1.0 / 6.0, 5.0 / 12.0, 5.0 / 12.0, 0.0],
        HyperfineState::F2 => [0.0, 1.0 / 20.0, 1.0 / 4.0, 7.0 / 10.0],
    }
}

/// The pair of counter-propagating Bragg beams.
///
/// `detuning` is the single-photon detuning from the F=2 → F'=3 line (Hz),
/// positive to the blue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserField {
    pub detuning: f64,
    /// Peak intensities of the two beams (W/m²).
    pub intensity_1: f64,
    pub intensity_2: f64,
    /// e⁻² beam diameter (m).
    pub beam_diameter: f64,
    pub total_power: f64,
    /// ω₁ − ω₂ (rad/s).
    pub freq_difference: f64,
}

impl LaserField {
    /// Gaussian beams sharing `total_power` with intensity ratio I₁/I₂ = `ratio`.
    pub fn from_power(total_power: f64, beam_diameter: f64, ratio: f64, detuning: f64) -> Result<Self> {
        if !(beam_diameter > 0.0) || total_power < 0.0 || !(ratio > 0.0) {
            return Err(Error::InvalidInput("beam diameter and ratio must be positive, power non-negative".into()));
        }
        let w = 0.5 * beam_diameter;
        let peak_total = 2.0 * total_power / (PI * w * w);
        Ok(Self {
            detuning,
            intensity_1: peak_total * ratio / (1.0 + ratio),
            intensity_2: peak_total / (1.0 + ratio),
            beam_diameter,
            total_power,
            freq_difference: 0.0,
        })
    }

    /// 80 mW in a 19 mm beam, equal split, at the given detuning.
    pub fn nominal(detuning: f64) -> Self {
        Self::from_power(0.080, 0.019, 1.0, detuning).expect("nominal field is valid")
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.intensity_1 < 0.0 || self.intensity_2 < 0.0 {
            return Err(Error::InvalidInput("intensities must be non-negative".into()));
        }
        if !(self.beam_diameter > 0.0) {
            return Err(Error::InvalidInput("beam diameter must be positive".into()));
        }
        Ok(())
    }

    /// Product of the single-photon Rabi frequencies of the full D2 line.
    fn rabi_product(&self) -> f64 {
        let s = 2.0 * SATURATION_INTENSITY;
        D2_LINEWIDTH * D2_LINEWIDTH * (self.intensity_1 / s).sqrt() * (self.intensity_2 / s).sqrt()
    }
}

/// Detuning (Hz) of the field from the F → F' line.
fn line_detuning(state: HyperfineState, f_excited: usize, detuning: f64, c: &PhysicalConstants) -> f64 {
    let levels = c.excited_levels();
    let excited = levels[f_excited] - levels[3];
    let ground = match state {
        HyperfineState::F1 => c.hyperfine_splitting,
        HyperfineState::F2 => 0.0,
    };
    detuning - (excited + ground)
}

/// Signed two-photon coupling (rad/s) after adiabatic elimination of 5P₃/₂:
/// Σ_F' S_FF' Ω₁Ω₂ / (2Δ_F'). Negative when the light is red of the lines.
pub fn signed_two_photon_coupling(
    state: HyperfineState,
    field: &LaserField,
    constants: &PhysicalConstants,
) -> Result<f64> {
    field.validate()?;
    let product = field.rabi_product();
    let mut sum = 0.0;
    for (fe, s) in strength(state).iter().enumerate() {
        if *s == 0.0 {
            continue;
        }
        let delta = line_detuning(state, fe, field.detuning, constants);
        if delta.abs() * 2.0 * PI < D2_LINEWIDTH {
            return Err(Error::Resonance { ground: state.f_number(), excited: fe as u8 });
        }
        sum += s / (2.0 * PI * delta);
    }
    Ok(0.5 * product * sum)
}

/// Two-photon Rabi frequency |Ω_F| (rad/s).
pub fn two_photon_rabi(state: HyperfineState, field: &LaserField, constants: &PhysicalConstants) -> Result<f64> {
    signed_two_photon_coupling(state, field, constants).map(f64::abs)
}

/// d|Ω_F|/dΔ in (rad/s) per Hz.
pub fn two_photon_rabi_slope(
    state: HyperfineState,
    field: &LaserField,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let signed = signed_two_photon_coupling(state, field, constants)?;
    let product = field.rabi_product();
    let mut d = 0.0;
    for (fe, s) in strength(state).iter().enumerate() {
        if *s == 0.0 {
            continue;
        }
        let delta = line_detuning(state, fe, field.detuning, constants);
        d -= s / (2.0 * PI * delta * delta);
    }
    Ok(signed.signum() * 0.5 * product * d)
}

fn imbalance(field: &LaserField, constants: &PhysicalConstants, detuning: f64) -> Result<f64> {
    let f = field.with_detuning(detuning);
    Ok(two_photon_rabi(HyperfineState::F1, &f, constants)? - two_photon_rabi(HyperfineState::F2, &f, constants)?)
}

/// Detuning Δ* (Hz from F=2 → F'=3) where |Ω₁| = |Ω₂|, searched in the
/// default bracket.
pub fn balanced_detuning_solve(field: &LaserField, constants: &PhysicalConstants) -> Result<f64> {
    balanced_detuning_solve_in(field, constants, DEFAULT_BRACKET_HZ)
}

pub fn balanced_detuning_solve_in(
    field: &LaserField,
    constants: &PhysicalConstants,
    bracket: (f64, f64),
) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo < hi) {
        return Err(Error::InvalidInput("detuning bracket must satisfy lo < hi".into()));
    }
    let scale = two_photon_rabi(HyperfineState::F1, &field.with_detuning(0.5 * (lo + hi)), constants)?;
    if scale == 0.0 {
        return Err(Error::InvalidInput("zero intensity: Rabi frequencies vanish everywhere".into()));
    }
    let root = brent_root(
        |d| imbalance(field, constants, d),
        lo,
        hi,
        1e-6,
        0.0,
        200,
    )
    .map_err(|_| Error::NoSolution { lo_hz: lo, hi_hz: hi })?;
    let f = field.with_detuning(root);
    let o1 = two_photon_rabi(HyperfineState::F1, &f, constants)?;
    let o2 = two_photon_rabi(HyperfineState::F2, &f, constants)?;
    if ((o1 - o2) / o1).abs() >= 1e-10 {
        return Err(Error::NoSolution { lo_hz: lo, hi_hz: hi });
    }
    Ok(root)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiSweepPoint {
    pub detuning_hz: f64,
    pub rabi_f1: f64,
    pub rabi_f2: f64,
}

/// |Ω₁|, |Ω₂| on `n` evenly spaced detunings in `bracket`.
pub fn rabi_sweep(
    field: &LaserField,
    constants: &PhysicalConstants,
    bracket: (f64, f64),
    n: usize,
) -> Result<Vec<RabiSweepPoint>> {
    if n < 2 {
        return Err(Error::InvalidInput("sweep needs at least two points".into()));
    }
    (0..n)
        .map(|i| {
            let d = bracket.0 + (bracket.1 - bracket.0) * i as f64 / (n - 1) as f64;
            let f = field.with_detuning(d);
            Ok(RabiSweepPoint {
                detuning_hz: d,
                rabi_f1: two_photon_rabi(HyperfineState::F1, &f, constants)?,
                rabi_f2: two_photon_rabi(HyperfineState::F2, &f, constants)?,
            })
        })
        .collect()
}
