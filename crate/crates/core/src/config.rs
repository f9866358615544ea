//! Flat `section.key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key has a default; unknown
//! keys are rejected. [`RunConfig::dump`] prints the full key set.

use std::path::{Path, PathBuf};

use crate::bragg::{balanced_detuning_solve_in, LaserField};
use crate::campaign::{CampaignSetup, SystematicsSetup};
use crate::interferometer::{FringeShape, NoiseModel};
use crate::model::{rb87_constants_with_g, InterferometerConfig, PhysicalConstants};
use crate::systematics::{MagneticProfile, TideModel};
use crate::{Error, Result};

trait ConfigValue: Sized {
    fn parse_value(s: &str) -> std::result::Result<Self, String>;
    fn render(&self) -> String;
}

macro_rules! scalar_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse_value(s: &str) -> std::result::Result<Self, String> {
                s.parse::<$t>().map_err(|e| e.to_string())
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
scalar_value!(f64, u64, u32, usize, String);

impl ConfigValue for bool {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        match s {
            "true" | "on" | "1" => Ok(true),
            "false" | "off" | "0" => Ok(false),
            _ => Err(format!("expected true/false, got {s:?}")),
        }
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for Vec<f64> {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"))).collect()
    }
    fn render(&self) -> String {
        self.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }
}

macro_rules! run_config {
    ($( $field:ident : $ty:ty = $default:expr, $key:literal, $doc:literal; )*) => {
        /// All tunable parameters of a run.
        #[derive(Debug, Clone, PartialEq, serde::Serialize)]
        pub struct RunConfig {
            $( #[doc = $doc] pub $field: $ty, )*
        }

        impl Default for RunConfig {
            fn default() -> Self {
                Self { $( $field: $default, )* }
            }
        }

        impl RunConfig {
            /// (key, documentation) for every accepted key.
            pub const KEYS: &'static [(&'static str, &'static str)] = &[ $( ($key, $doc), )* ];

            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                match key {
                    $( $key => {
                        self.$field = <$ty as ConfigValue>::parse_value(value)
                            .map_err(|e| Error::Parse(format!("{key}: {e}")))?;
                    } )*
                    _ => return Err(Error::Parse(format!("unknown key {key:?}"))),
                }
                Ok(())
            }

            /// Current value of every key, in declaration order.
            pub fn entries(&self) -> Vec<(&'static str, String)> {
                vec![ $( ($key, self.$field.render()), )* ]
            }
        }
    };
}

run_config! {
    seed: u64 = 1, "run.seed", "Base seed of the counter-addressed random streams.";
    output_dir: String = "out".into(), "run.output_dir", "Directory receiving CSV and report files.";
    g_nominal: f64 = 9.794, "constants.g_nominal_m_s2", "Local gravity used for unit conversion (m/s²).";
    gravity: f64 = 9.794, "constants.gravity_m_s2", "True gravity seen by the atoms before tides (m/s²).";
    pulse_separation: f64 = 0.150, "interferometer.T_s", "Pulse separation T (s).";
    bragg_order: u32 = 1, "interferometer.bragg_order", "Bragg diffraction order n.";
    momentum_width: f64 = 0.37, "interferometer.momentum_width_hbar_k", "Momentum width, ±1σ full width (ħk).";
    pi_pulse_width: f64 = 42e-6, "interferometer.pi_pulse_fwhm_s", "FWHM of the π-pulse envelope (s).";
    cycle_time: f64 = 1.0, "interferometer.cycle_time_s", "Duration of one shot (s).";
    alternation_lag: f64 = 2.0, "interferometer.alternation_lag_s", "Delay from an F=2 point to the next F=1 point (s).";
    fountain_height: f64 = 0.66, "interferometer.fountain_height_m", "Apex height above the launch point (m).";
    ladder_half_size: usize = 5, "interferometer.ladder_half_size", "Momentum ladder truncation M.";
    total_power: f64 = 0.080, "laser.total_power_w", "Total Bragg beam power (W).";
    beam_diameter: f64 = 0.019, "laser.beam_diameter_m", "e⁻² beam diameter (m).";
    intensity_ratio: f64 = 1.0, "laser.intensity_ratio", "Intensity ratio I₁/I₂ of the two beams.";
    bracket_lo: f64 = 0.5e9, "laser.bracket_lo_hz", "Lower end of the detuning search (Hz).";
    bracket_hi: f64 = 6.0e9, "laser.bracket_hi_hz", "Upper end of the detuning search (Hz).";
    sweep_points: usize = 221, "laser.sweep_points", "Points in the Rabi-frequency sweep.";
    noise_enabled: bool = true, "noise.enabled", "Switch all noise sources.";
    sensitivity: f64 = 1.2e-7, "noise.sensitivity_g_rthz", "Target differential sensitivity at 1 s (g/√Hz).";
    detection_sigma: f64 = 0.01, "noise.detection_sigma", "Readout noise per peak response.";
    vibration: f64 = 0.1, "noise.vibration_rad", "Common-mode vibration phase per probe slot (rad).";
    contrast: f64 = 0.6, "fringe.contrast", "Fringe contrast.";
    offset: f64 = 0.5, "fringe.offset", "Fringe offset.";
    points_per_period: usize = 20, "fringe.points_per_period", "Chirp steps per fringe period.";
    periods: usize = 2, "fringe.periods", "Fringe periods per scan.";
    hours: f64 = 63.0, "campaign.hours", "Campaign length (h).";
    bin_width: f64 = 400.0, "campaign.bin_width_s", "Averaging bin (s).";
    k_tilde_injected: f64 = 0.0, "campaign.k_tilde_injected", "Violation strength added to the simulated data.";
    systematics_enabled: bool = true, "systematics.enabled", "Switch all systematic channels.";
    tides_enabled: bool = true, "systematics.tides", "Include solid-earth tides.";
    zeeman_enabled: bool = true, "systematics.zeeman", "Include the quadratic Zeeman bias.";
    tide_file: String = String::new(), "systematics.tide_file", "Tide constituent table; empty selects the built-in model.";
    profile_file: String = String::new(), "systematics.profile_file", "Magnetic profile table; empty selects the built-in profile.";
    bias_current: f64 = 0.1, "systematics.bias_current_a", "Bias solenoid current (A).";
    zeeman_uncertainty: f64 = 0.5e-10, "systematics.zeeman_uncertainty_g", "Uncertainty assigned to the Zeeman row (g).";
    ac_gradient_fraction: f64 = 1e-6, "systematics.ac_gradient_fraction", "Intensity change across the arm separation.";
    ac_imbalance_fraction: f64 = 5e-4, "systematics.ac_imbalance_fraction", "Intensity change between first and last pulse.";
    freq_error: f64 = 1e6, "systematics.freq_error_hz", "Laser frequency excursion from the balanced detuning (Hz).";
    currents: Vec<f64> = vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3], "zeeman.currents_a", "Solenoid currents for the modulation curve (A).";
    efficiency_samples: usize = 500, "efficiency.samples", "Momentum samples in the efficiency average.";
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply(text)?;
        Ok(c)
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v.trim()).map_err(|e| match e {
                Error::Parse(m) => Error::Parse(format!("line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// `key = value` for every key, loadable by [`RunConfig::parse`].
    pub fn dump(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn output_path(&self) -> PathBuf {
        PathBuf::from(&self.output_dir)
    }

    pub fn constants(&self) -> Result<PhysicalConstants> {
        let c = rb87_constants_with_g(self.g_nominal);
        c.validate()?;
        Ok(c)
    }

    pub fn interferometer(&self) -> Result<InterferometerConfig> {
        let c = self.constants()?;
        let mut cfg = InterferometerConfig::nominal(&c);
        cfg.pulse_separation = self.pulse_separation;
        cfg.bragg_order = self.bragg_order;
        cfg.momentum_width = self.momentum_width;
        cfg.pi_pulse_width = self.pi_pulse_width;
        cfg.cycle_time = self.cycle_time;
        cfg.alternation_lag = self.alternation_lag;
        cfg.fountain_height = self.fountain_height;
        cfg.launch_velocity = (2.0 * c.g_nominal * self.fountain_height).sqrt();
        cfg.ladder_half_size = self.ladder_half_size;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Laser field at detuning `detuning_hz`.
    pub fn laser(&self, detuning_hz: f64) -> Result<LaserField> {
        LaserField::from_power(self.total_power, self.beam_diameter, self.intensity_ratio, detuning_hz)
    }

    pub fn bracket(&self) -> (f64, f64) {
        (self.bracket_lo, self.bracket_hi)
    }

    pub fn balanced_detuning(&self) -> Result<f64> {
        balanced_detuning_solve_in(&self.laser(0.0)?, &self.constants()?, self.bracket())
    }

    pub fn shape(&self) -> Result<FringeShape> {
        FringeShape::new(self.contrast, self.offset)
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        if !self.noise_enabled {
            return Ok(NoiseModel::none());
        }
        NoiseModel::calibrated(
            self.sensitivity,
            self.detection_sigma,
            self.vibration,
            &self.shape()?,
            &self.interferometer()?,
            self.g_nominal,
        )
    }

    pub fn tide_model(&self) -> Result<TideModel> {
        if self.tide_file.is_empty() {
            Ok(TideModel::mid_latitude())
        } else {
            TideModel::load(Path::new(&self.tide_file))
        }
    }

    pub fn magnetic_profile(&self) -> Result<MagneticProfile> {
        let p = if self.profile_file.is_empty() {
            MagneticProfile::default_calibrated()
        } else {
            MagneticProfile::load(Path::new(&self.profile_file))?
        };
        p.with_current(self.bias_current)
    }

    pub fn systematics(&self) -> Result<SystematicsSetup> {
        if !self.systematics_enabled {
            return Ok(SystematicsSetup::off());
        }
        Ok(SystematicsSetup {
            tides: if self.tides_enabled { Some(self.tide_model()?) } else { None },
            zeeman: if self.zeeman_enabled { Some(self.magnetic_profile()?) } else { None },
            zeeman_uncertainty: if self.zeeman_enabled { self.zeeman_uncertainty } else { 0.0 },
            ac_gradient_fraction: self.ac_gradient_fraction,
            ac_imbalance_fraction: self.ac_imbalance_fraction,
            freq_error_hz: self.freq_error,
            balanced_detuning_hz: if self.freq_error != 0.0 { self.balanced_detuning()? } else { 0.0 },
        })
    }

    pub fn campaign(&self) -> Result<CampaignSetup> {
        if !(self.hours > 0.0) {
            return Err(Error::InvalidInput("campaign.hours must be positive".into()));
        }
        Ok(CampaignSetup {
            constants: self.constants()?,
            config: self.interferometer()?,
            noise: self.noise()?,
            shape: self.shape()?,
            systematics: self.systematics()?,
            gravity: self.gravity,
            duration_s: self.hours * 3600.0,
            bin_width_s: self.bin_width,
            k_tilde_injected: self.k_tilde_injected,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trips() {
        let mut c = RunConfig::default();
        c.set("run.seed", "42").unwrap();
        c.set("zeeman.currents_a", "0.1, 0.2,0.3").unwrap();
        let back = RunConfig::parse(&c.dump()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.currents, vec![0.1, 0.2, 0.3]);
        assert_eq!(RunConfig::KEYS.len(), c.entries().len());
    }

    #[test]
    fn comments_and_errors() {
        let c = RunConfig::parse("# header\n\ninterferometer.T_s = 0.1  # shorter\nnoise.enabled=off\n").unwrap();
        assert_eq!(c.pulse_separation, 0.1);
        assert!(!c.noise_enabled);
        assert!(matches!(RunConfig::parse("bogus.key = 1"), Err(Error::Parse(_))));
        let e = RunConfig::parse("\nrun.seed = -3").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(RunConfig::parse("run.seed").is_err());
    }

    #[test]
    fn defaults_build_a_campaign() {
        let c = RunConfig::default();
        let s = c.campaign().unwrap();
        assert_eq!(s.duration_s, 63.0 * 3600.0);
        assert!(s.systematics.tides.is_some() && s.systematics.zeeman.is_some());
        assert!((s.systematics.balanced_detuning_hz - 3.19e9).abs() < 0.02e9);
        let off = RunConfig::parse("systematics.enabled = false\nnoise.enabled = false").unwrap();
        let s = off.campaign().unwrap();
        assert_eq!(s.noise, NoiseModel::none());
        assert!(!s.systematics.enabled());
    }
}
