//! Numerical model of phononic-bandgap protection for superconducting
//! qubits against two-level-system (TLS) defect loss.
//!
//! * [`ensemble`]: standard-tunneling-model defect sampling.
//! * [`gap`]: gapped phonon bath, exact single-defect decay and angular
//!   averaging of the suppression.
//! * [`dynamics`]: qubit exchanging one excitation with N decaying defects.
//! * [`steady_state`]: continuous-wave loss tangent saturation.
//! * [`harness`]: presets, sweeps and CSV/manifest output.

pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod gap;
pub mod harness;
pub mod integrate;
pub mod quadrature;
pub mod rng;
pub mod steady_state;
pub mod table;

pub use error::{Error, Result};
