//! Physical constants, clock states and interferometer geometry shared by
//! every other module.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant (J·s).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Frozen ⁸⁷Rb D2 data used throughout the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub atom_mass: f64,
    /// Bragg laser wavelength (m).
    pub wavelength: f64,
    /// Single-photon wavenumber 2π/λ (1/m).
    pub wavenumber: f64,
    /// Recoil angular frequency ħk²/2m (rad/s).
    pub recoil_omega: f64,
    /// Local gravity (m/s²).
    pub g_nominal: f64,
    /// 5S₁/₂ F=1 ↔ F=2 splitting (Hz).
    pub hyperfine_splitting: f64,
    /// 5P₃/₂ intervals F'=1−0, F'=2−1, F'=3−2 (Hz).
    pub excited_splittings: [f64; 3],
    /// Clock-transition quadratic Zeeman coefficient (Hz/T²).
    pub clock_quadratic_coeff: f64,
}

/// The authoritative constant table.
pub fn rb87_constants() -> PhysicalConstants {
    rb87_constants_with_g(9.794)
}

pub fn rb87_constants_with_g(g_nominal: f64) -> PhysicalConstants {
    let atom_mass = 1.443_160_648e-25;
    let wavelength = 780.241_209_686e-9;
    let wavenumber = 2.0 * PI / wavelength;
    PhysicalConstants {
        hbar: HBAR,
        atom_mass,
        wavelength,
        wavenumber,
        recoil_omega: HBAR * wavenumber * wavenumber / (2.0 * atom_mass),
        g_nominal,
        hyperfine_splitting: 6.834_682_610_904_29e9,
        excited_splittings: [72.2180e6, 156.9470e6, 266.6500e6],
        // 575.15 Hz/G², 1 G = 1e-4 T
        clock_quadratic_coeff: 575.15e8,
    }
}

impl PhysicalConstants {
    /// Energies (Hz) of the 5P₃/₂ F'=0..3 levels relative to F'=0.
    pub fn excited_levels(&self) -> [f64; 4] {
        let s = self.excited_splittings;
        [0.0, s[0], s[0] + s[1], s[0] + s[1] + s[2]]
    }

    /// Recoil velocity of a 2nħk Bragg transition (m/s).
    pub fn bragg_recoil_velocity(&self, order: u32) -> f64 {
        2.0 * order as f64 * self.hbar * self.wavenumber / self.atom_mass
    }

    pub fn validate(&self) -> Result<()> {
        let scalars = [
            self.hbar,
            self.atom_mass,
            self.wavelength,
            self.wavenumber,
            self.recoil_omega,
            self.g_nominal,
            self.hyperfine_splitting,
            self.clock_quadratic_coeff,
        ];
        if scalars
            .iter()
            .chain(self.excited_splittings.iter())
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(Error::InvalidInput("constants must be finite and positive".into()));
        }
        let wr = self.hbar * self.wavenumber.powi(2) / (2.0 * self.atom_mass);
        if ((wr - self.recoil_omega) / wr).abs() > 1e-12 {
            return Err(Error::InvalidInput("recoil frequency inconsistent with ħ, k, m".into()));
        }
        Ok(())
    }

    /// `key = value` listing of the table, one entry per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: f64, unit: &str| {
            s.push_str(&format!("{k} = {v:.12e}  # {unit}\n"));
        };
        line("hbar", self.hbar, "J s");
        line("atom_mass", self.atom_mass, "kg");
        line("wavelength", self.wavelength, "m");
        line("wavenumber", self.wavenumber, "1/m");
        line("recoil_omega", self.recoil_omega, "rad/s");
        line("recoil_frequency", self.recoil_omega / (2.0 * PI), "Hz");
        line("g_nominal", self.g_nominal, "m/s^2");
        line("hyperfine_splitting", self.hyperfine_splitting, "Hz");
        line("excited_splitting_1_0", self.excited_splittings[0], "Hz");
        line("excited_splitting_2_1", self.excited_splittings[1], "Hz");
        line("excited_splitting_3_2", self.excited_splittings[2], "Hz");
        line("clock_quadratic_coeff", self.clock_quadratic_coeff, "Hz/T^2");
        s
    }
}

/// The two magnetically insensitive clock states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HyperfineState {
    F1,
    F2,
}

impl HyperfineState {
    pub const BOTH: [HyperfineState; 2] = [HyperfineState::F1, HyperfineState::F2];

    pub fn from_f(f: u8) -> Result<Self> {
        match f {
            1 => Ok(HyperfineState::F1),
            2 => Ok(HyperfineState::F2),
            _ => Err(Error::InvalidInput(format!("hyperfine F must be 1 or 2, got {f}"))),
        }
    }

    pub fn f_number(self) -> u8 {
        match self {
            HyperfineState::F1 => 1,
            HyperfineState::F2 => 2,
        }
    }

    pub fn m_f(self) -> i8 {
        0
    }

    /// Sign of the quadratic Zeeman shift of the m_F = 0 level.
    pub fn zeeman_sign(self) -> f64 {
        match self {
            HyperfineState::F1 => -1.0,
            HyperfineState::F2 => 1.0,
        }
    }

    /// |F⊥|² = F(F+1) − m_F².
    pub fn spin_perp_sq(self) -> f64 {
        let f = self.f_number() as f64;
        let m = self.m_f() as f64;
        f * (f + 1.0) - m * m
    }

    pub fn other(self) -> Self {
        match self {
            HyperfineState::F1 => HyperfineState::F2,
            HyperfineState::F2 => HyperfineState::F1,
        }
    }
}

impl std::fmt::Display for HyperfineState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F={}", self.f_number())
    }
}

pub fn spin_perp_amplitude(f: u8) -> Result<f64> {
    HyperfineState::from_f(f).map(HyperfineState::spin_perp_sq)
}

/// Geometry and timing of the π/2–π–π/2 sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerConfig {
    /// Pulse separation (s).
    pub pulse_separation: f64,
    pub bragg_order: u32,
    /// Effective wavevector 2k (1/m).
    pub k_eff: f64,
    /// Chirp rate (rad/s²).
    pub chirp_alpha: f64,
    /// Launch velocity (m/s).
    pub launch_velocity: f64,
    pub fountain_height: f64,
    /// Vertical momentum spread, ħk units, read as a ±1σ full width.
    pub momentum_width: f64,
    /// FWHM of the π-pulse Rabi envelope (s).
    pub pi_pulse_width: f64,
    pub cycle_time: f64,
    /// Time between an F=2 point and the following F=1 point (s).
    pub alternation_lag: f64,
    /// Momentum ladder half-size M.
    pub ladder_half_size: usize,
}

impl InterferometerConfig {
    pub fn nominal(constants: &PhysicalConstants) -> Self {
        let fountain_height = 0.66;
        Self {
            pulse_separation: 0.150,
            bragg_order: 1,
            k_eff: 2.0 * constants.wavenumber,
            chirp_alpha: 2.0 * constants.wavenumber * constants.g_nominal,
            launch_velocity: (2.0 * constants.g_nominal * fountain_height).sqrt(),
            fountain_height,
            momentum_width: 0.37,
            pi_pulse_width: 42e-6,
            cycle_time: 1.0,
            alternation_lag: 2.0,
            ladder_half_size: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if !(self.pulse_separation > 0.0) {
            return bad("pulse separation T must be positive");
        }
        if self.bragg_order < 1 {
            return bad("Bragg order must be at least 1");
        }
        if !(self.momentum_width > 0.0) {
            return bad("momentum width must be positive");
        }
        if !(self.pi_pulse_width > 0.0) {
            return bad("π-pulse width must be positive");
        }
        if !(self.k_eff > 0.0) {
            return bad("k_eff must be positive");
        }
        if !(self.cycle_time > 0.0) || self.alternation_lag < self.cycle_time {
            return bad("alternation lag must be at least one cycle time");
        }
        if self.ladder_half_size < self.bragg_order as usize + 3 {
            return bad("ladder half-size must be at least n + 3");
        }
        Ok(())
    }

    /// Gaussian σ of the π-pulse envelope: FWHM / (2√(2 ln 2)).
    pub fn pi_pulse_sigma(&self) -> f64 {
        self.pi_pulse_width / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
    }

    /// Gaussian σ of the momentum distribution in ħk units.
    pub fn momentum_sigma(&self) -> f64 {
        self.momentum_width / 2.0
    }

    /// ∂φ/∂g = n·k_eff·T² (rad per m/s²).
    pub fn scale_factor(&self) -> f64 {
        self.bragg_order as f64 * self.k_eff * self.pulse_separation.powi(2)
    }

    /// Fringe period in chirp rate, 2π/(nT²).
    pub fn chirp_period(&self) -> f64 {
        2.0 * PI / (self.bragg_order as f64 * self.pulse_separation.powi(2))
    }
}

/// Classical arm trajectories of the interferometer, t measured from the
/// first pulse. The upper arm receives the 2nħk kick at t = 0 and gives it
/// back at t = T; the lower arm receives it at t = T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub z_first_pulse: f64,
    pub v_first_pulse: f64,
    pub gravity: f64,
    pub recoil_velocity: f64,
    pub pulse_separation: f64,
}

impl Trajectory {
    /// Launch from z = 0 with the π pulse at the apex.
    pub fn symmetric_about_apex(config: &InterferometerConfig, constants: &PhysicalConstants) -> Self {
        let g = constants.g_nominal;
        let t_apex = config.launch_velocity / g;
        let t1 = t_apex - config.pulse_separation;
        Self {
            z_first_pulse: config.launch_velocity * t1 - 0.5 * g * t1 * t1,
            v_first_pulse: config.launch_velocity - g * t1,
            gravity: g,
            recoil_velocity: constants.bragg_recoil_velocity(config.bragg_order),
            pulse_separation: config.pulse_separation,
        }
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.pulse_separation
    }

    fn free(&self, t: f64) -> f64 {
        self.z_first_pulse + self.v_first_pulse * t - 0.5 * self.gravity * t * t
    }

    pub fn z_upper(&self, t: f64) -> f64 {
        self.free(t) + self.recoil_velocity * t.min(self.pulse_separation)
    }

    pub fn z_lower(&self, t: f64) -> f64 {
        self.free(t) + self.recoil_velocity * (t - self.pulse_separation).max(0.0)
    }

    pub fn arm_separation(&self, t: f64) -> f64 {
        self.z_upper(t) - self.z_lower(t)
    }

    pub fn max_separation(&self) -> f64 {
        self.recoil_velocity * self.pulse_separation
    }

    /// Lowest and highest point reached by either arm.
    pub fn z_range(&self) -> (f64, f64) {
        let n = 2000;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=n {
            let t = self.duration() * i as f64 / n as f64;
            lo = lo.min(self.z_lower(t)).min(self.z_upper(t));
            hi = hi.max(self.z_lower(t)).max(self.z_upper(t));
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recoil_frequency_matches_hand_calculation() {
        let c = rb87_constants();
        // ħk²/(2m)/2π with k = 2π/780.241209686 nm, m = 1.443160648e-25 kg:
        // k = 8.052 945 2e6 1/m, ħk² = 6.838 8e-21, /(2m) = 2.369 41e4 rad/s
        let f_r = c.recoil_omega / (2.0 * PI);
        assert!((f_r - 3771.01).abs() < 0.5, "{f_r}");
        assert!((4.0 * f_r - 15084.0).abs() < 2.0);
        assert!(c.hyperfine_splitting > 0.0);
        c.validate().unwrap();
    }

    #[test]
    fn recoil_invariant_holds() {
        let c = rb87_constants();
        let wr = c.hbar * c.wavenumber * c.wavenumber / (2.0 * c.atom_mass);
        assert!(((wr - c.recoil_omega) / wr).abs() < 1e-12);
    }

    #[test]
    fn spin_perp_values() {
        assert_eq!(spin_perp_amplitude(1).unwrap(), 2.0);
        assert_eq!(spin_perp_amplitude(2).unwrap(), 6.0);
        assert_eq!(spin_perp_amplitude(2).unwrap() - spin_perp_amplitude(1).unwrap(), 4.0);
        assert!(spin_perp_amplitude(0).is_err());
        assert!(spin_perp_amplitude(3).is_err());
    }

    #[test]
    fn zeeman_sign_flips() {
        assert_eq!(HyperfineState::F1.zeeman_sign(), -HyperfineState::F2.zeeman_sign());
        assert_eq!(HyperfineState::F1.other(), HyperfineState::F2);
    }

    #[test]
    fn max_separation_for_nominal_geometry() {
        let c = rb87_constants();
        let cfg = InterferometerConfig::nominal(&c);
        let traj = Trajectory::symmetric_about_apex(&cfg, &c);
        // 2ħk/m = 2 * 1.054571817e-34 * 8.0529452e6 / 1.443160648e-25 = 1.17693e-2 m/s
        let independent = 2.0 * 1.054571817e-34 * 8.0529452e6 / 1.443160648e-25 * 0.15;
        assert!((traj.max_separation() / independent - 1.0).abs() < 0.01);
        assert!((traj.max_separation() - 1.765e-3).abs() < 0.02e-3);
        assert_eq!(traj.arm_separation(0.0), 0.0);
        assert!(traj.arm_separation(0.3).abs() < 1e-15);
        assert!((traj.arm_separation(0.15) - traj.max_separation()).abs() < 1e-15);
    }

    #[test]
    fn apex_at_fountain_height() {
        let c = rb87_constants();
        let cfg = InterferometerConfig::nominal(&c);
        let traj = Trajectory::symmetric_about_apex(&cfg, &c);
        let z_apex = traj.z_lower(cfg.pulse_separation);
        assert!((z_apex - 0.66).abs() < 1e-9);
        let (lo, hi) = traj.z_range();
        assert!(lo > 0.54 && hi < 0.6625);
    }

    #[test]
    fn config_validation() {
        let c = rb87_constants();
        let mut cfg = InterferometerConfig::nominal(&c);
        cfg.validate().unwrap();
        cfg.alternation_lag = 0.5;
        assert!(cfg.validate().is_err());
        let mut cfg = InterferometerConfig::nominal(&c);
        cfg.ladder_half_size = 3;
        assert!(cfg.validate().is_err());
        let mut cfg = InterferometerConfig::nominal(&c);
        cfg.pulse_separation = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn fringe_period_in_chirp() {
        let c = rb87_constants();
        let cfg = InterferometerConfig::nominal(&c);
        assert!((cfg.chirp_period() - 279.2527).abs() < 1e-3);
        assert!((cfg.scale_factor() - 3.6238e5).abs() < 10.0);
    }
}
