//! Exact density-operator core for registers of one to four qubits.
//!
//! States are immutable values; every operation returns a new state. Pauli
//! operators and Pauli channels take fast paths that avoid dense products,
//! which keeps Monte Carlo trials cheap.

mod channel;
mod density;
mod pauli;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use channel::KrausChannel;
pub use density::{DensityOperator, ProjectiveOutcome, MAX_QUBITS};
pub use pauli::{Outcome, Pauli, PauliString};

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;

/// Tolerance for the unitarity, completeness, trace and Hermiticity invariants.
pub const TOLERANCE: f64 = 1e-12;

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(
        2,
        2,
        &[Complex64::new(h, 0.0), Complex64::new(h, 0.0), Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
    )
}

/// `exp(-i angle Z / 2)`.
pub fn rz(angle: f64) -> CMatrix {
    let half = 0.5 * angle;
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::from_polar(1.0, -half),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, half),
        ],
    )
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
pub(crate) fn max_abs_diff_for_tests(a: &DensityOperator, b: &DensityOperator) -> f64 {
    max_abs_diff(a.matrix(), b.matrix())
}
