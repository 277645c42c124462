//! Dissipative dynamics of two capacitively coupled singlet-triplet qubits.
//!
//! The crate integrates a time-local second-order master equation for two
//! qubits coupled to Ohmic dephasing baths (one shared bath or one bath per
//! qubit) and reports concurrence and the unclamped eigenvalue difference
//! (DDSE) along the trajectory.
//!
//! Units: time in ns, frequencies in rad/ns, temperature in mK, ħ = 1.

pub mod bath;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod model;
pub mod qlinalg;
pub mod redfield;

pub use error::{Error, Result};
