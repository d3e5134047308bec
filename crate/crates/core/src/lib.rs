//! Simulation and verification toolkit for one-way time-bin QKD with
//! quarter-wave-plate-reflector Michelson (Q-M) interferometers.
//!
//! * [`su2`]: 2×2 complex algebra, SU(2) parameterization, Haar sampling.
//! * [`optics`]: PM fiber, QWP reflector, Faraday and plain mirrors, and the
//!   transpose round-trip rule.
//! * [`interferometer`]: the two-path Alice–channel–Bob link, output power
//!   and fringe visibility under random polarization disturbances.
//! * [`qkd`]: decoy-state BB84 gains, bounds, key rate, drift sessions and
//!   calibration.
//! * [`config`] and [`cli`]: scenario files and the `qmqkd` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod interferometer;
pub mod optics;
pub mod qkd;
pub mod su2;

pub use error::{Error, Result};
