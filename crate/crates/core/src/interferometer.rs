//! Mach-Zehnder phase model, chirp compensation and shot simulation.
//!
//! The campaign uses the closed-form phase φ = n(k_eff·g − α)T². The ladder
//! solver enters through [`ladder_mz_phase`], which runs the full
//! π/2–π–π/2 sequence and is used to cross-check the closed form.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bragg::{propagate_free, propagate_pulse, CalibratedPulses, MomentumLadderState};
use crate::model::{HyperfineState, InterferometerConfig, PhysicalConstants};
use crate::stats::{population_from_two_samples, wrap_phase};
use crate::systematics::{tide_g, TideModel};
use crate::{par, Error, Result};

/// Two-photon resonance Δω = 2k·v + 4nω_r (rad/s).
pub fn resonance_offset(velocity: f64, order: u32, constants: &PhysicalConstants) -> Result<f64> {
    if order < 1 {
        return Err(Error::InvalidInput("Bragg order must be at least 1".into()));
    }
    Ok(2.0 * constants.wavenumber * velocity + 4.0 * order as f64 * constants.recoil_omega)
}

/// φ = n(k_eff·g − α)T².
pub fn mz_phase(g: f64, alpha: f64, config: &InterferometerConfig) -> f64 {
    config.bragg_order as f64 * (config.k_eff * g - alpha) * config.pulse_separation.powi(2)
}

/// Chirp rate putting an atom falling at `g` at mid-fringe (φ = π/2).
pub fn mid_fringe_alpha(g: f64, config: &InterferometerConfig) -> f64 {
    let nt2 = config.bragg_order as f64 * config.pulse_separation.powi(2);
    config.k_eff * g - FRAC_PI_2 / nt2
}

/// P = offset − (contrast/2)·cos φ.
pub fn transition_probability(phase: f64, contrast: f64, offset: f64) -> Result<f64> {
    FringeShape::new(contrast, offset).map(|s| s.probability(phase))
}

/// Static fringe contrast and offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeShape {
    pub contrast: f64,
    pub offset: f64,
}

impl FringeShape {
    pub fn new(contrast: f64, offset: f64) -> Result<Self> {
        let s = Self { contrast, offset };
        s.validate()?;
        Ok(s)
    }

    pub fn ideal() -> Self {
        Self { contrast: 1.0, offset: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        let half = 0.5 * self.contrast;
        if !(0.0..=1.0).contains(&self.contrast)
            || !(0.0..=1.0).contains(&self.offset)
            || self.offset - half < -1e-15
            || self.offset + half > 1.0 + 1e-15
        {
            return Err(Error::InvalidInput(format!(
                "offset {} ± contrast/2 {} leaves [0, 1]",
                self.offset, half
            )));
        }
        Ok(())
    }

    pub fn probability(&self, phase: f64) -> f64 {
        self.offset - 0.5 * self.contrast * phase.cos()
    }

    /// Phase in [0, π] reproducing probability `p`; clamped at the fringe
    /// extremes.
    pub fn invert(&self, p: f64) -> f64 {
        ((self.offset - p) / (0.5 * self.contrast)).clamp(-1.0, 1.0).acos()
    }
}

impl Default for FringeShape {
    fn default() -> Self {
        Self { contrast: 0.6, offset: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// White phase noise per shot (rad).
    pub per_shot_phase_sigma: f64,
    /// Readout noise on each peak response (probability units).
    pub detection_sigma: f64,
    /// Vibration phase shared by the two states within a pair (rad).
    pub vibration_common: f64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self { per_shot_phase_sigma: 0.0, detection_sigma: 0.0, vibration_common: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.per_shot_phase_sigma, self.detection_sigma, self.vibration_common]
            .iter()
            .any(|v| !(*v >= 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidInput("noise amplitudes must be non-negative".into()));
        }
        Ok(())
    }

    /// Chooses the per-shot phase noise so that the differential series,
    /// one value per pair, has Allan deviation `asd_g` (units of g) at
    /// τ = 1 s. Near mid-fringe one probability point carries phase variance
    /// σ_φ²/2 + 2σ_d²/C².
    pub fn calibrated(
        asd_g: f64,
        detection_sigma: f64,
        vibration_common: f64,
        shape: &FringeShape,
        config: &InterferometerConfig,
        g_nominal: f64,
    ) -> Result<Self> {
        let pair_period = pair_period(config);
        let pair_sigma_phase = asd_g / pair_period.sqrt() * g_nominal * config.scale_factor();
        let point_var = 0.5 * pair_sigma_phase * pair_sigma_phase;
        let detection_var = 2.0 * detection_sigma * detection_sigma / (shape.contrast * shape.contrast);
        if detection_var >= point_var {
            return Err(Error::Calibration(format!(
                "detection noise alone exceeds the {asd_g:e} g/√Hz target"
            )));
        }
        let n = Self {
            per_shot_phase_sigma: (2.0 * (point_var - detection_var)).sqrt(),
            detection_sigma,
            vibration_common,
        };
        n.validate()?;
        Ok(n)
    }
}

/// Sensitivity target of the differential measurement (g/√Hz).
pub const TARGET_SENSITIVITY: f64 = 1.2e-7;

/// Time between consecutive F=2/F=1 pairs: the F=1 point starts
/// `alternation_lag` after the F=2 point and takes two cycles.
pub fn pair_period(config: &InterferometerConfig) -> f64 {
    config.alternation_lag + 2.0 * config.cycle_time
}

/// Which fixed Raman probe frequency a shot reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotRole {
    Peak1,
    Peak2,
}

impl ShotRole {
    pub const BOTH: [ShotRole; 2] = [ShotRole::Peak1, ShotRole::Peak2];

    pub fn index(self) -> usize {
        match self {
            ShotRole::Peak1 => 0,
            ShotRole::Peak2 => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ShotRole::Peak1 => "peak1",
            ShotRole::Peak2 => "peak2",
        }
    }
}

/// One detection. `probability` is P(|p₀ + 2nħk⟩) implied by this shot's
/// single peak reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub timestamp: f64,
    pub state: HyperfineState,
    pub alpha: f64,
    pub probability: f64,
    pub role: ShotRole,
}

/// A probability estimate from one peak1/peak2 shot pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub alpha: f64,
    pub probability: f64,
    pub state: HyperfineState,
    pub timestamp: f64,
}

impl FringePoint {
    pub fn from_shots(first: &ShotRecord, second: &ShotRecord) -> Result<Self> {
        if first.state != second.state || first.alpha != second.alpha {
            return Err(Error::InvalidInput("shots belong to different probability points".into()));
        }
        let (p1, p2) = match (first.role, second.role) {
            (ShotRole::Peak1, ShotRole::Peak2) => (first, second),
            (ShotRole::Peak2, ShotRole::Peak1) => (second, first),
            _ => return Err(Error::InvalidInput("a point needs one shot at each peak".into())),
        };
        Ok(Self {
            alpha: first.alpha,
            probability: population_from_two_samples(1.0 - p1.probability, p2.probability)?,
            state: first.state,
            timestamp: first.timestamp.min(second.timestamp),
        })
    }
}

/// Everything besides noise that sets the acceleration seen by a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotEnvironment {
    /// Local gravity without tides (m/s²).
    pub gravity: f64,
    pub tide: Option<TideModel>,
    /// Per-state systematic acceleration, [F=1, F=2] (m/s²).
    pub state_bias: [f64; 2],
    /// Injected violation strength; g_F scales by 1 + k̃|F⊥|².
    pub k_tilde: f64,
}

impl ShotEnvironment {
    pub fn quiet(gravity: f64) -> Self {
        Self { gravity, tide: None, state_bias: [0.0; 2], k_tilde: 0.0 }
    }

    pub fn g_total(&self, state: HyperfineState, t: f64) -> f64 {
        let tide = self.tide.as_ref().map_or(0.0, |m| tide_g(t, m));
        let bias = match state {
            HyperfineState::F1 => self.state_bias[0],
            HyperfineState::F2 => self.state_bias[1],
        };
        (self.gravity + tide + bias) * (1.0 + self.k_tilde * state.spin_perp_sq())
    }
}

/// Bundles the per-shot inputs that stay fixed over a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotModel {
    pub config: InterferometerConfig,
    pub noise: NoiseModel,
    pub shape: FringeShape,
    pub environment: ShotEnvironment,
}

impl ShotModel {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.noise.validate()?;
        self.shape.validate()
    }
}

/// Simulates one shot. `vibration` is the common-mode phase drawn for this
/// probe slot of the pair.
#[allow(clippy::too_many_arguments)]
pub fn simulate_shot<R: Rng>(
    state: HyperfineState,
    alpha: f64,
    timestamp: f64,
    role: ShotRole,
    model: &ShotModel,
    vibration: f64,
    rng: &mut R,
) -> Result<ShotRecord> {
    let phase_noise = Normal::new(0.0, model.noise.per_shot_phase_sigma)
        .map_err(|e| Error::InvalidInput(e.to_string()))?
        .sample(rng);
    let detection = Normal::new(0.0, model.noise.detection_sigma)
        .map_err(|e| Error::InvalidInput(e.to_string()))?
        .sample(rng);
    let g = model.environment.g_total(state, timestamp);
    let phase = mz_phase(g, alpha, &model.config) + vibration + phase_noise;
    let p = model.shape.probability(phase);
    let implied = match role {
        // the peak1 probe reads the |p₀⟩ population 1 − P
        ShotRole::Peak1 => 1.0 - ((1.0 - p) + detection),
        ShotRole::Peak2 => p + detection,
    };
    Ok(ShotRecord { timestamp, state, alpha, probability: implied.clamp(0.0, 1.0), role })
}

/// Counter-addressed generator for pair `index` of a run seeded by `seed`.
pub fn pair_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The four shots of one pair in time order: F=2 peak1, peak2 then F=1
/// peak1, peak2, starting at `t0`. `alphas` is [F=2, F=1].
pub fn simulate_pair(index: u64, t0: f64, alphas: [f64; 2], model: &ShotModel, seed: u64) -> Result<[ShotRecord; 4]> {
    let mut rng = pair_rng(seed, index);
    let vib = Normal::new(0.0, model.noise.vibration_common).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let vibration = [vib.sample(&mut rng), vib.sample(&mut rng)];
    let cfg = &model.config;
    let mut out = [ShotRecord {
        timestamp: 0.0,
        state: HyperfineState::F2,
        alpha: 0.0,
        probability: 0.0,
        role: ShotRole::Peak1,
    }; 4];
    let mut k = 0;
    for (state, start, alpha) in [
        (HyperfineState::F2, t0, alphas[0]),
        (HyperfineState::F1, t0 + cfg.alternation_lag, alphas[1]),
    ] {
        for role in ShotRole::BOTH {
            let t = start + role.index() as f64 * cfg.cycle_time;
            out[k] = simulate_shot(state, alpha, t, role, model, vibration[role.index()], &mut rng)?;
            k += 1;
        }
    }
    Ok(out)
}

/// Chirp value of point `i` in a scan of `points_per_period · periods`
/// points centred on `center`.
pub fn scan_alpha(i: usize, center: f64, points_per_period: usize, periods: usize, config: &InterferometerConfig) -> f64 {
    let step = config.chirp_period() / points_per_period as f64;
    let half = (points_per_period * periods) as f64 / 2.0;
    center + step * (i as f64 - half)
}

/// Scans α across `periods` fringe periods for `state`. The other state is
/// simulated alongside on the same schedule, so a scan of F=1 and a scan of
/// F=2 with the same seed share their common-mode noise.
#[allow(clippy::too_many_arguments)]
pub fn fringe_scan(
    state: HyperfineState,
    alpha_center: f64,
    points_per_period: usize,
    periods: usize,
    model: &ShotModel,
    seed: u64,
) -> Result<Vec<FringePoint>> {
    if periods < 1 || points_per_period < 1 {
        return Err(Error::InvalidInput("a scan needs at least one period and one point per period".into()));
    }
    model.validate()?;
    let n = points_per_period * periods;
    let period = pair_period(&model.config);
    let pairs = par::try_map_range(n, |i| {
        let a = scan_alpha(i, alpha_center, points_per_period, periods, &model.config);
        simulate_pair(i as u64, i as f64 * period, [a, a], model, seed)
    })?;
    pairs
        .iter()
        .map(|shots| {
            let s = if state == HyperfineState::F2 { &shots[0..2] } else { &shots[2..4] };
            FringePoint::from_shots(&s[0], &s[1])
        })
        .collect()
}

/// Acceleration (m/s²) implied by a probability measured at chirp `alpha`,
/// assuming the phase lies in [0, π] (mid-fringe operation).
pub fn invert_probability(p: f64, alpha: f64, shape: &FringeShape, config: &InterferometerConfig) -> f64 {
    let nt2 = config.bragg_order as f64 * config.pulse_separation.powi(2);
    (alpha + shape.invert(p) / nt2) / config.k_eff
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderCrossCheck {
    pub ladder_phase: f64,
    pub analytic_phase: f64,
    /// Fringe amplitude seen by the four-step readout.
    pub contrast: f64,
}

impl LadderCrossCheck {
    pub fn discrepancy(&self) -> f64 {
        wrap_phase(self.ladder_phase - self.analytic_phase).abs()
    }
}

/// Runs the full π/2–π–π/2 sequence on the momentum ladder for the
/// resonant velocity class and extracts the phase with four quarter-period
/// steps of the last pulse phase.
///
/// In the frame falling with the atom the laser phase seen at time t is
/// (k_eff·g − α)·t²/2 per ladder step.
pub fn ladder_mz_phase(
    g: f64,
    alpha: f64,
    pulses: &CalibratedPulses,
    config: &InterferometerConfig,
    constants: &PhysicalConstants,
) -> Result<LadderCrossCheck> {
    let rate = config.k_eff * g - alpha;
    let laser = |t: f64| (0.5 * rate * t * t, rate * t);
    let t = config.pulse_separation;
    let n = config.bragg_order as i64;

    let gap_after = |half_a: f64, half_b: f64| t - half_a - half_b;
    let readout = |step: usize| -> Result<f64> {
        let mut psi = MomentumLadderState::ground(config.ladder_half_size, 0.0);
        let seq = [(pulses.half_pi, 0.0), (pulses.pi, t), (pulses.half_pi, 2.0 * t)];
        for (k, (w, tc)) in seq.iter().enumerate() {
            let (phase, phase_rate) = laser(*tc);
            let extra = if k == 2 { step as f64 * FRAC_PI_2 } else { 0.0 };
            psi = propagate_pulse(&psi, &w.with_phase(phase + extra, phase_rate), config, constants, 0.0)?;
            if k < 2 {
                let next = seq[k + 1].0;
                psi = propagate_free(&psi, gap_after(w.half_duration(), next.half_duration()), config, constants, 0.0);
            }
        }
        Ok(psi.population(n))
    };
    let p: Vec<f64> = (0..4).map(readout).collect::<Result<_>>()?;
    let (s, c) = (p[1] - p[3], p[2] - p[0]);
    Ok(LadderCrossCheck {
        ladder_phase: s.atan2(c),
        analytic_phase: wrap_phase(mz_phase(g, alpha, config)),
        contrast: (s * s + c * c).sqrt(),
    })
}

/// 2π in chirp units for the configured sequence.
pub fn fringe_period(config: &InterferometerConfig) -> f64 {
    2.0 * PI / (config.bragg_order as f64 * config.pulse_separation.powi(2))
}
