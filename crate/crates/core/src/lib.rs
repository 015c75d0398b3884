//! Simulation and analysis of repeated, actively corrected phase-flip error
//! correction on a three-qubit code read out through a single ancilla.
//!
//! The crate is organised bottom-up:
//!
//! * [`qstate`] — exact density operators for up to four qubits.
//! * [`code`] — the phase-flip code, its logical operators and decoders.
//! * [`noise`] — device constants and every error process.
//! * [`measurement`] — ancilla-mediated stabilizer readout.
//! * [`feedback`] — the classical controller and Pauli frame.
//! * [`experiments`] — protocol runners (exact enumeration and Monte Carlo).
//! * [`analytics`] — closed-form curves, fitting and calibration.
//! * [`cli`] — the command-line front end.
//!
//! # Qubit ordering
//!
//! Tensor positions are 0-based and position 0 is the most significant factor.
//! A data-only register holds code qubits 1, 2, 3 at positions 0, 1, 2. When an
//! ancilla is present it occupies position 0 and the data qubits shift to the
//! trailing positions 1, 2, 3. Data qubits are therefore always the last three
//! positions of a register.

pub mod analytics;
pub mod cli;
pub mod code;
pub mod error;
pub mod experiments;
pub mod feedback;
pub mod measurement;
pub mod noise;
pub mod parallel;
pub mod qstate;

pub use error::{Error, Result};
