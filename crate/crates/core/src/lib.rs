//! Numerics for detecting and protecting two-qubit entanglement: CHSH
//! values, variational entanglement witnesses, and nonlocal measurements
//! through Bell-state meters, evaluated both analytically and with a
//! gate-level circuit simulation.

pub mod chsh;
pub mod circuit;
pub mod entanglement;
pub mod error;
pub mod nonlocal_meas;
pub mod qmath;
pub mod states;
pub mod vew;

pub use error::{Error, Result};
