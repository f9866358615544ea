use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("laser is resonant with the F={ground} -> F'={excited} line")]
    Resonance { ground: u8, excited: u8 },

    #[error("no sign change of the Rabi imbalance in [{lo_hz:.6e}, {hi_hz:.6e}] Hz")]
    NoSolution { lo_hz: f64, hi_hz: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("pulse calibration failed: {0}")]
    Calibration(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("fringe contrast is zero; phase is unconstrained")]
    UnconstrainedPhase,

    #[error("position {z_m} m lies outside the magnetic profile [{lo_m}, {hi_m}] m")]
    OutOfDomain { z_m: f64, lo_m: f64, hi_m: f64 },

    #[error("averaging window {window_s} s is shorter than the longest constituent period {period_s} s")]
    WindowTooShort { window_s: f64, period_s: f64 },

    #[error("undefined probability: both peak responses are zero")]
    UndefinedProbability,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for errors caused by numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Resonance { .. }
                | Error::NoSolution { .. }
                | Error::Integration(_)
                | Error::Calibration(_)
                | Error::Fit(_)
                | Error::UnconstrainedPhase
                | Error::OutOfDomain { .. }
                | Error::UndefinedProbability
        )
    }
}
