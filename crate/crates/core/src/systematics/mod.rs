//! Systematic channels of the differential measurement.

pub mod light_shift;
pub mod tides;
pub mod zeeman;

use serde::{Deserialize, Serialize};

pub use light_shift::{ac_stark_bound, two_photon_light_shift_bound};
pub use tides::{tide_alternation_bias, tide_g, tide_rate, TideConstituent, TideModel};
pub use zeeman::{
    calibrate_gradient_fraction, zeeman_bias, zeeman_differential, zeeman_modulation_curve, zeeman_potential, MagneticProfile, ModulationCurve,
    QuadraticFit, DEFAULT_GRADIENT_FRACTION, DEFAULT_TARGET_BIAS, NOMINAL_CURRENT,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Statistical,
    QuadraticZeeman,
    AcStark,
    TwoPhotonLightShift,
    Tide,
    GravityGradient,
    Coriolis,
    Wavefront,
}

impl Channel {
    pub fn label(self) -> &'static str {
        match self {
            Channel::Statistical => "Statistical uncertainty",
            Channel::QuadraticZeeman => "Quadratic Zeeman shift",
            Channel::AcStark => "AC Stark shift",
            Channel::TwoPhotonLightShift => "Two-photon light shift",
            Channel::Tide => "Tide effect",
            Channel::GravityGradient => "Gravity gradient",
            Channel::Coriolis => "Coriolis effect",
            Channel::Wavefront => "Wavefront aberration",
        }
    }
}

/// One budget row, values in units of g.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystematicShift {
    pub channel: Channel,
    pub value: f64,
    pub uncertainty: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SystematicShift {
    pub fn new(channel: Channel, value: f64, uncertainty: f64) -> crate::Result<Self> {
        if !(uncertainty >= 0.0) || !value.is_finite() {
            return Err(crate::Error::InvalidInput(format!(
                "{}: uncertainty must be non-negative and value finite",
                channel.label()
            )));
        }
        Ok(Self { channel, value, uncertainty, note: None })
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Channel that cancels between the two states; carried as a zero row.
    pub fn common_mode(channel: Channel) -> Self {
        Self {
            channel,
            value: 0.0,
            uncertainty: 0.0,
            note: Some("common to both states; rejected by the differential measurement".into()),
        }
    }
}
