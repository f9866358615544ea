//! Bragg diffraction physics: effective two-photon couplings of the two
//! clock states, the detuning that balances them, and coherent propagation
//! of momentum-ladder amplitudes through Gaussian pulses.

mod calibration;
mod ladder;
mod ode;
mod rabi;
pub mod roots;

pub use calibration::{calibrate_pi_pulse, diffraction_efficiency, transfer_at, CalibratedPulses};
pub use ladder::{propagate_free, propagate_pulse, MomentumLadderState, PulseWaveform};
pub use ode::{Dopri5, OdeStats};
pub use rabi::{
    balanced_detuning_solve, balanced_detuning_solve_in, rabi_sweep, signed_two_photon_coupling,
    two_photon_rabi, two_photon_rabi_slope, LaserField, RabiSweepPoint, DEFAULT_BRACKET_HZ,
    D2_LINEWIDTH, SATURATION_INTENSITY,
};
