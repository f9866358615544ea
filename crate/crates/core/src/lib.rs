//! Desk-scale simulator for a dual-hyperfine-state Bragg atom interferometer
//! test of the universality of free fall.
//!
//! The crate follows the measurement chain end to end:
//!
//! * [`model`]: ⁸⁷Rb constants, clock states, interferometer geometry.
//! * [`bragg`]: two-photon Rabi couplings, the balanced-detuning solver and
//!   Gaussian-pulse propagation on the momentum ladder.
//! * [`interferometer`]: Mach-Zehnder phase, fringes and single shots.
//! * [`systematics`]: quadratic Zeeman, light-shift bounds and tides.
//! * [`stats`]: Raman detection, sine fringe fitting, Allan deviation and
//!   weighted means.
//! * [`campaign`]: shot scheduling, the long differential run, the error
//!   budget and the Eötvös ratio.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.
//! Every random draw comes from a counter-addressed ChaCha stream, so results
//! do not depend on the feature or on thread scheduling.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bragg;
pub mod campaign;
pub mod config;
mod error;
pub mod interferometer;
pub mod model;
pub mod output;
pub mod par;
pub mod stats;
pub mod systematics;

pub use error::{Error, Result};
pub use model::{HyperfineState, InterferometerConfig, PhysicalConstants, Trajectory};
