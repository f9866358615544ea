use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ode::Dopri5;
use crate::model::{InterferometerConfig, PhysicalConstants};
use crate::{Error, Result};

/// Amplitudes on the momentum ladder |p₀ + 2mħk⟩, m ∈ [−M, M].
///
/// Serialized as JSON with `amplitudes` stored as `[re, im]` pairs ordered
/// from m = −M to m = +M.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumLadderState {
    pub half_size: usize,
    pub amplitudes: Vec<Complex64>,
    /// p₀ (kg·m/s).
    pub reference_momentum: f64,
}

impl MomentumLadderState {
    /// All population in m = 0.
    pub fn ground(half_size: usize, reference_momentum: f64) -> Self {
        let mut amplitudes = vec![Complex64::default(); 2 * half_size + 1];
        amplitudes[half_size] = Complex64::new(1.0, 0.0);
        Self { half_size, amplitudes, reference_momentum }
    }

    pub fn orders(&self) -> impl Iterator<Item = i64> {
        let m = self.half_size as i64;
        -m..=m
    }

    pub fn amplitude(&self, order: i64) -> Complex64 {
        let idx = order + self.half_size as i64;
        if idx < 0 || idx as usize >= self.amplitudes.len() {
            Complex64::default()
        } else {
            self.amplitudes[idx as usize]
        }
    }

    pub fn population(&self, order: i64) -> f64 {
        self.amplitude(order).norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn conj(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a.conj()).collect(),
            ..self.clone()
        }
    }

    /// Same state embedded in (or cut down to) a ladder of half-size `m`.
    pub fn resized(&self, m: usize) -> Self {
        let mut out = Self::ground(m, self.reference_momentum);
        for (i, a) in out.amplitudes.iter_mut().enumerate() {
            *a = self.amplitude(i as i64 - m as i64);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ladder state serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let st: Self = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if st.amplitudes.len() != 2 * st.half_size + 1 {
            return Err(Error::Parse("amplitude count does not match half_size".into()));
        }
        Ok(st)
    }
}

/// Gaussian Rabi envelope Ω(t) = Ω_peak·exp(−t²/2σ²) on |t| ≤ truncation·σ.
///
/// `phase` is the laser phase imprinted on each upward step of the ladder;
/// `phase_rate` lets it ramp linearly across the pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseWaveform {
    pub sigma: f64,
    pub peak_rabi: f64,
    pub truncation: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub phase_rate: f64,
}

impl PulseWaveform {
    pub fn gaussian(sigma: f64, peak_rabi: f64) -> Self {
        Self { sigma, peak_rabi, truncation: 4.0, phase: 0.0, phase_rate: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || self.peak_rabi < 0.0 || !self.peak_rabi.is_finite() {
            return Err(Error::InvalidInput("pulse needs σ > 0 and a finite Ω_peak ≥ 0".into()));
        }
        if !(self.truncation >= 4.0) {
            return Err(Error::InvalidInput("envelope truncation must be at least 4σ".into()));
        }
        Ok(())
    }

    pub fn envelope(&self, t: f64) -> f64 {
        if t.abs() > self.truncation * self.sigma {
            0.0
        } else {
            self.peak_rabi * (-0.5 * t * t / (self.sigma * self.sigma)).exp()
        }
    }

    pub fn half_duration(&self) -> f64 {
        self.truncation * self.sigma
    }

    /// ∫Ω dt of the untruncated envelope.
    pub fn area(&self) -> f64 {
        self.peak_rabi * self.sigma * (2.0 * std::f64::consts::PI).sqrt()
    }

    pub fn with_area_scaled(mut self, factor: f64) -> Self {
        self.peak_rabi *= factor;
        self
    }

    pub fn with_phase(mut self, phase: f64, phase_rate: f64) -> Self {
        self.phase = phase;
        self.phase_rate = phase_rate;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("waveform serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: Self = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        w.validate()?;
        Ok(w)
    }
}

/// Diagonal ladder energy (rad/s) of order m in the frame resonant with the
/// |0⟩ ↔ |n⟩ transition: 4ω_r(m² − nm) + m·δ_D.
pub(crate) fn ladder_energy(order: i64, bragg_order: u32, recoil_omega: f64, doppler: f64) -> f64 {
    let m = order as f64;
    4.0 * recoil_omega * (m * m - bragg_order as f64 * m) + m * doppler
}

/// Integrates the coupled ladder equations through one Gaussian pulse.
///
/// `doppler_offset` (rad/s) is the two-photon Doppler detuning of the atom
/// from the resonant velocity class; a momentum error of x·ħk corresponds to
/// 4ω_r·x.
pub fn propagate_pulse(
    psi: &MomentumLadderState,
    pulse: &PulseWaveform,
    config: &InterferometerConfig,
    constants: &PhysicalConstants,
    doppler_offset: f64,
) -> Result<MomentumLadderState> {
    pulse.validate()?;
    let n = config.bragg_order;
    if psi.half_size < n as usize + 3 {
        return Err(Error::InvalidInput(format!(
            "ladder half-size {} is below n + 3 = {}",
            psi.half_size,
            n + 3
        )));
    }
    let norm0 = psi.norm_sqr();
    if (norm0 - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!("input state norm {norm0} is not 1")));
    }
    let mut out = psi.clone();
    if pulse.peak_rabi == 0.0 {
        return Ok(out);
    }

    let m = psi.half_size as i64;
    let energies: Vec<f64> = (-m..=m)
        .map(|o| ladder_energy(o, n, constants.recoil_omega, doppler_offset))
        .collect();
    let len = energies.len();
    let half = pulse.half_duration();
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let coupling = 0.5 * pulse.envelope(t);
        let up = Complex64::from_polar(coupling, pulse.phase + pulse.phase_rate * t);
        let down = up.conj();
        for i in 0..len {
            let mut h = y[i] * energies[i];
            if i > 0 {
                h += up * y[i - 1];
            }
            if i + 1 < len {
                h += down * y[i + 1];
            }
            dy[i] = Complex64::new(h.im, -h.re);
        }
    };
    Dopri5::default().integrate(rhs, -half, half, &mut out.amplitudes)?;

    let drift = (out.norm_sqr() - norm0).abs();
    if drift > 1e-6 {
        return Err(Error::Integration(format!("norm drift {drift:e} exceeds 1e-6")));
    }
    Ok(out)
}

/// Free evolution for `duration` seconds: each order picks up its kinetic
/// phase exp(−iE_m t).
pub fn propagate_free(
    psi: &MomentumLadderState,
    duration: f64,
    config: &InterferometerConfig,
    constants: &PhysicalConstants,
    doppler_offset: f64,
) -> MomentumLadderState {
    let mut out = psi.clone();
    let m = psi.half_size as i64;
    for (a, o) in out.amplitudes.iter_mut().zip(-m..=m) {
        let e = ladder_energy(o, config.bragg_order, constants.recoil_omega, doppler_offset);
        *a *= Complex64::from_polar(1.0, -e * duration);
    }
    out
}
