//! The three-qubit phase-flip code.
//!
//! `|0>_L = (|+++> + |--->)/√2`, `|1>_L = (|+++> - |--->)/√2`. Stabilizer
//! generators are `XXI` and `IXX`; logical operators are `X_L = X_k`,
//! `Y_L = Y_k Z Z` and `Z_L = ZZZ` for any choice of qubit `k`.
//!
//! All functions here take data-only (three-qubit) states. Corrections found
//! by the decoder are never applied as gates; they live in a [`LogicalFrame`]
//! and are folded into every readout by conjugation.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::qstate::{DensityOperator, Outcome, Pauli, PauliString};

pub const DATA_QUBITS: usize = 3;

/// Classical Pauli frame: pending `Z` corrections per data qubit and a
/// pending logical bit flip (`|0>_L <-> |1>_L`).
///
/// The frame stands for the operator `F = X_L^flip · Z_1^z1 Z_2^z2 Z_3^z3`; a
/// readout of observable `O` reports `Tr(rho F O F)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalFrame {
    pub z_frame: [bool; 3],
    pub logical_flip: bool,
}

impl LogicalFrame {
    /// Combines two frames (bitwise XOR). Every frame is its own inverse.
    pub fn compose(self, other: LogicalFrame) -> LogicalFrame {
        LogicalFrame {
            z_frame: [
                self.z_frame[0] ^ other.z_frame[0],
                self.z_frame[1] ^ other.z_frame[1],
                self.z_frame[2] ^ other.z_frame[2],
            ],
            logical_flip: self.logical_flip ^ other.logical_flip,
        }
    }

    /// Sign picked up by a data-qubit Pauli string under conjugation by the frame.
    pub fn sign_for(&self, observable: &PauliString) -> f64 {
        let letters = observable.letters();
        let mut anti = 0;
        for (q, &p) in letters.iter().enumerate() {
            // Z corrections anticommute with X and Y.
            if self.z_frame[q] && matches!(p, Pauli::X | Pauli::Y) {
                anti += 1;
            }
            // The X-type logical flip anticommutes with Y and Z.
            if self.logical_flip && matches!(p, Pauli::Y | Pauli::Z) {
                anti += 1;
            }
        }
        if anti % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Outcomes of the two stabilizer generators `XXI` and `IXX`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syndrome {
    pub s1: Outcome,
    pub s2: Outcome,
}

impl Syndrome {
    pub const NO_ERROR: Syndrome = Syndrome { s1: Outcome::Plus, s2: Outcome::Plus };

    pub fn new(s1: Outcome, s2: Outcome) -> Self {
        Self { s1, s2 }
    }

    /// Category index: 0 no error, 1..=3 error on that qubit.
    pub fn category(self) -> usize {
        match decode_syndrome(self) {
            Correction::None => 0,
            Correction::Qubit(q) => q + 1,
        }
    }

    /// Number of `+1` outcomes in the pair.
    pub fn plus_count(self) -> usize {
        self.s1.is_plus() as usize + self.s2.is_plus() as usize
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.s1, self.s2)
    }
}

/// Decoded correction: nothing, or a `Z` on data qubit `0..3` (code qubit `q + 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Correction {
    None,
    Qubit(usize),
}

/// Lookup decoder for single phase flips.
pub fn decode_syndrome(s: Syndrome) -> Correction {
    use Outcome::*;
    match (s.s1, s.s2) {
        (Plus, Plus) => Correction::None,
        (Minus, Plus) => Correction::Qubit(0),
        (Minus, Minus) => Correction::Qubit(1),
        (Plus, Minus) => Correction::Qubit(2),
    }
}

/// Stabilizer generators on a data-only register.
pub fn stabilizers() -> [PauliString; 2] {
    [PauliString::new(vec![Pauli::X, Pauli::X, Pauli::I]), PauliString::new(vec![Pauli::I, Pauli::X, Pauli::X])]
}

/// Which representative of the logical operators a readout uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogicalReadout {
    /// Mean over the three cyclic choices of readout qubit.
    #[default]
    PermutationMean,
    /// Use data qubit `0..3` for `X_L = X_k` and `Y_L = Y_k Z Z`.
    Qubit(usize),
}

impl LogicalReadout {
    fn qubits(self) -> Vec<usize> {
        match self {
            LogicalReadout::PermutationMean => vec![0, 1, 2],
            LogicalReadout::Qubit(k) => vec![k],
        }
    }
}

/// `X_L` with qubit `k` as representative.
pub fn logical_x(k: usize) -> PauliString {
    PauliString::single(DATA_QUBITS, k, Pauli::X)
}

/// `Y_L = Y_k` with `Z` on the other two qubits.
pub fn logical_y(k: usize) -> PauliString {
    let mut letters = vec![Pauli::Z; DATA_QUBITS];
    letters[k] = Pauli::Y;
    PauliString::new(letters)
}

pub fn logical_z() -> PauliString {
    PauliString::new(vec![Pauli::Z; DATA_QUBITS])
}

/// Logical bit flip used by the frame and by the measurement imprint.
pub fn logical_flip_operator() -> PauliString {
    PauliString::new(vec![Pauli::X; DATA_QUBITS])
}

/// Pure encoded state `alpha|0>_L + beta|1>_L`.
pub fn encode(alpha: Complex64, beta: Complex64) -> Result<DensityOperator> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::OutOfRange { name: "|alpha|^2 + |beta|^2", value: norm, range: "1 ± 1e-10" });
    }
    let plus = product_x_state([1.0, 1.0, 1.0]);
    let minus = product_x_state([-1.0, -1.0, -1.0]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amps: Vec<Complex64> = (0..8).map(|b| (alpha + beta) * plus[b] * h + (alpha - beta) * minus[b] * h).collect();
    DensityOperator::pure(&amps)
}

/// Amplitudes of `|s1 X, s2 X, s3 X>` for signs `s`.
pub fn product_x_state(signs: [f64; 3]) -> Vec<Complex64> {
    let norm = (1.0f64 / 8.0).sqrt();
    (0..8usize)
        .map(|b| {
            let mut amp = norm;
            for (q, s) in signs.iter().enumerate() {
                if b & (1 << (2 - q)) != 0 {
                    amp *= s;
                }
            }
            Complex64::new(amp, 0.0)
        })
        .collect()
}

/// The six logical states used for process tomography.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogicalBasis {
    Zero,
    One,
    PlusX,
    MinusX,
    PlusY,
    MinusY,
}

impl LogicalBasis {
    pub const ALL: [LogicalBasis; 6] = [
        LogicalBasis::Zero,
        LogicalBasis::One,
        LogicalBasis::PlusX,
        LogicalBasis::MinusX,
        LogicalBasis::PlusY,
        LogicalBasis::MinusY,
    ];

    pub fn amplitudes(self) -> (Complex64, Complex64) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match self {
            LogicalBasis::Zero => (one, zero),
            LogicalBasis::One => (zero, one),
            LogicalBasis::PlusX => (one * h, one * h),
            LogicalBasis::MinusX => (one * h, -one * h),
            LogicalBasis::PlusY => (one * h, Complex64::new(0.0, h)),
            LogicalBasis::MinusY => (one * h, Complex64::new(0.0, -h)),
        }
    }

    pub fn encoded(self) -> DensityOperator {
        let (a, b) = self.amplitudes();
        encode(a, b).expect("basis amplitudes are normalised")
    }

    /// Logical axis (0 = X, 1 = Y, 2 = Z) and the sign of the ideal Bloch vector.
    pub fn axis(self) -> (usize, f64) {
        match self {
            LogicalBasis::Zero => (2, 1.0),
            LogicalBasis::One => (2, -1.0),
            LogicalBasis::PlusX => (0, 1.0),
            LogicalBasis::MinusX => (0, -1.0),
            LogicalBasis::PlusY => (1, 1.0),
            LogicalBasis::MinusY => (1, -1.0),
        }
    }

    /// State fidelity `(1 + s <O>)/2` given logical expectations `(X, Y, Z)`.
    pub fn fidelity(self, expectations: [f64; 3]) -> f64 {
        let (axis, sign) = self.axis();
        (0.5 * (1.0 + sign * expectations[axis])).clamp(0.0, 1.0)
    }
}

/// `(<X_L>, <Y_L>, <Z_L>)` read through `frame`.
pub fn logical_observables(state: &DensityOperator, frame: &LogicalFrame, readout: LogicalReadout) -> Result<[f64; 3]> {
    check_data_register(state)?;
    let qubits = readout.qubits();
    if qubits.iter().any(|&k| k >= DATA_QUBITS) {
        return Err(Error::InvalidArgument("readout qubit out of range".into()));
    }
    let framed = |p: PauliString| -> Result<f64> { Ok(frame.sign_for(&p) * state.expectation(&p)?) };
    let n = qubits.len() as f64;
    let mut x = 0.0;
    let mut y = 0.0;
    for &k in &qubits {
        x += framed(logical_x(k))?;
        y += framed(logical_y(k))?;
    }
    let z = framed(logical_z())?;
    Ok([x / n, y / n, z])
}

/// Majority-vote readout `(X1 + X2 + X3 - X1X2X3)/2` through `frame`.
pub fn majority_vote_xl(state: &DensityOperator, frame: &LogicalFrame) -> Result<f64> {
    check_data_register(state)?;
    let mut total = 0.0;
    for k in 0..DATA_QUBITS {
        let p = logical_x(k);
        total += frame.sign_for(&p) * state.expectation(&p)?;
    }
    let xxx = logical_flip_operator();
    total -= frame.sign_for(&xxx) * state.expectation(&xxx)?;
    Ok(0.5 * total)
}

/// The six final-state fidelities of a process tomography run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalStateFidelities {
    pub f0: f64,
    pub f1: f64,
    pub f_plus_x: f64,
    pub f_minus_x: f64,
    pub f_plus_y: f64,
    pub f_minus_y: f64,
}

impl LogicalStateFidelities {
    pub fn from_fn(mut f: impl FnMut(LogicalBasis) -> f64) -> Self {
        Self {
            f0: f(LogicalBasis::Zero),
            f1: f(LogicalBasis::One),
            f_plus_x: f(LogicalBasis::PlusX),
            f_minus_x: f(LogicalBasis::MinusX),
            f_plus_y: f(LogicalBasis::PlusY),
            f_minus_y: f(LogicalBasis::MinusY),
        }
    }

    fn values(&self) -> [f64; 6] {
        [self.f0, self.f1, self.f_plus_x, self.f_minus_x, self.f_plus_y, self.f_minus_y]
    }
}

/// Process fidelity with the identity from the six logical state fidelities.
pub fn process_fidelity(f: &LogicalStateFidelities) -> Result<f64> {
    for v in f.values() {
        check_probability("state fidelity", v)?;
    }
    Ok((f.values().iter().sum::<f64>() - 2.0) / 4.0)
}

/// Fidelity with the code space, `(1 + <XXI> + <IXX> + <XIX>)/4`.
pub fn code_space_fidelity(state: &DensityOperator) -> Result<f64> {
    check_data_register(state)?;
    let mut total = 1.0;
    for s in ["XXI", "IXX", "XIX"] {
        total += state.expectation(&s.parse()?)?;
    }
    Ok(0.25 * total)
}

fn check_data_register(state: &DensityOperator) -> Result<()> {
    if state.n_qubits() != DATA_QUBITS {
        return Err(Error::DimensionMismatch(format!(
            "expected a {DATA_QUBITS}-qubit data register, got {} qubits",
            state.n_qubits()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ev(state: &DensityOperator, p: &str) -> f64 {
        state.expectation(&p.parse().unwrap()).unwrap()
    }

    #[test]
    fn encoded_zero_is_stabilized() {
        let s = encode(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        for p in ["XXI", "IXX", "ZZZ"] {
            assert!((ev(&s, p) - 1.0).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn encoded_plus_x_is_product_state() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = encode(c(h, 0.0), c(h, 0.0)).unwrap();
        assert!((ev(&s, "XII") - 1.0).abs() < 1e-12);
        let prod = product_x_state([1.0, 1.0, 1.0]);
        assert!((s.fidelity_with_pure(&prod).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn encoded_plus_y_has_unit_yzz() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = encode(c(h, 0.0), c(0.0, h)).unwrap();
        assert!((ev(&s, "YZZ") - 1.0).abs() < 1e-12);
    }

    #[test]
    fn encode_rejects_unnormalised_input() {
        assert!(encode(c(1.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn encoded_states_are_pure_code_states() {
        for b in LogicalBasis::ALL {
            let s = b.encoded();
            assert!((s.purity() - 1.0).abs() < 1e-10);
            assert!((code_space_fidelity(&s).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn decoder_table() {
        use Outcome::*;
        assert_eq!(decode_syndrome(Syndrome::new(Plus, Plus)), Correction::None);
        assert_eq!(decode_syndrome(Syndrome::new(Minus, Plus)), Correction::Qubit(0));
        assert_eq!(decode_syndrome(Syndrome::new(Minus, Minus)), Correction::Qubit(1));
        assert_eq!(decode_syndrome(Syndrome::new(Plus, Minus)), Correction::Qubit(2));
    }

    #[test]
    fn every_single_z_error_is_identified() {
        // Deterministic stabilizer outcomes after Z_q, over all six basis states.
        let [g1, g2] = stabilizers();
        for b in LogicalBasis::ALL {
            for q in 0..3 {
                let s = b.encoded().conjugate_pauli(&PauliString::single(3, q, Pauli::Z)).unwrap();
                let e1 = s.expectation(&g1).unwrap();
                let e2 = s.expectation(&g2).unwrap();
                assert!((e1.abs() - 1.0).abs() < 1e-12 && (e2.abs() - 1.0).abs() < 1e-12);
                let to_outcome = |e: f64| if e > 0.0 { Outcome::Plus } else { Outcome::Minus };
                let syn = Syndrome::new(to_outcome(e1), to_outcome(e2));
                assert_eq!(decode_syndrome(syn), Correction::Qubit(q), "{b:?} Z{q}");
            }
        }
    }

    #[test]
    fn logical_observables_of_basis_states() {
        let frame = LogicalFrame::default();
        let px = logical_observables(&LogicalBasis::PlusX.encoded(), &frame, LogicalReadout::PermutationMean).unwrap();
        assert!((px[0] - 1.0).abs() < 1e-12 && px[1].abs() < 1e-12 && px[2].abs() < 1e-12);
        let z = logical_observables(&LogicalBasis::Zero.encoded(), &frame, LogicalReadout::Qubit(1)).unwrap();
        assert!(z[0].abs() < 1e-12 && z[1].abs() < 1e-12 && (z[2] - 1.0).abs() < 1e-12);
        let too_small = DensityOperator::basis(2, 0).unwrap();
        assert!(logical_observables(&too_small, &frame, LogicalReadout::PermutationMean).is_err());
    }

    #[test]
    fn frame_conjugation_cancels_physical_z() {
        for b in LogicalBasis::ALL {
            let clean = b.encoded();
            for readout in [LogicalReadout::PermutationMean, LogicalReadout::Qubit(0), LogicalReadout::Qubit(2)] {
                let expected = logical_observables(&clean, &LogicalFrame::default(), readout).unwrap();
                for q in 0..3 {
                    let hit = clean.conjugate_pauli(&PauliString::single(3, q, Pauli::Z)).unwrap();
                    let mut frame = LogicalFrame::default();
                    frame.z_frame[q] = true;
                    let got = logical_observables(&hit, &frame, readout).unwrap();
                    for a in 0..3 {
                        assert!((got[a] - expected[a]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn logical_flip_frame_cancels_physical_flip() {
        for b in LogicalBasis::ALL {
            let clean = b.encoded();
            let expected =
                logical_observables(&clean, &LogicalFrame::default(), LogicalReadout::PermutationMean).unwrap();
            let flipped = clean.conjugate_pauli(&logical_flip_operator()).unwrap();
            let frame = LogicalFrame { logical_flip: true, ..Default::default() };
            let got = logical_observables(&flipped, &frame, LogicalReadout::PermutationMean).unwrap();
            for a in 0..3 {
                assert!((got[a] - expected[a]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn majority_vote_on_product_states() {
        let frame = LogicalFrame::default();
        for pattern in 0..8u32 {
            let signs = [0, 1, 2].map(|q| if pattern & (1 << q) != 0 { -1.0 } else { 1.0 });
            let state = DensityOperator::pure(&product_x_state(signs)).unwrap();
            let minus = pattern.count_ones();
            let majority = if minus >= 2 { -1.0 } else { 1.0 };
            let mv = majority_vote_xl(&state, &frame).unwrap();
            assert!((mv - majority).abs() < 1e-12, "pattern {pattern:03b}");
            let plain = logical_observables(&state, &frame, LogicalReadout::Qubit(0)).unwrap()[0];
            if minus == 0 || minus == 3 {
                assert!((plain - mv).abs() < 1e-12);
            }
            if minus == 2 && signs[0] > 0.0 {
                // The flipped pair outvotes qubit 1: plain X1 still says +1.
                assert!((plain - mv).abs() > 1.0);
            }
        }
    }

    #[test]
    fn process_fidelity_examples() {
        let all = |v| LogicalStateFidelities { f0: v, f1: v, f_plus_x: v, f_minus_x: v, f_plus_y: v, f_minus_y: v };
        assert!((process_fidelity(&all(1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((process_fidelity(&all(0.5)).unwrap() - 0.25).abs() < 1e-15);
        let dephased = LogicalStateFidelities { f0: 1.0, f1: 1.0, ..all(0.5) };
        assert!((process_fidelity(&dephased).unwrap() - 0.5).abs() < 1e-15);
        assert!(process_fidelity(&all(1.2)).is_err());
    }

    #[test]
    fn code_space_fidelity_of_mixed_state() {
        let mixed = DensityOperator::maximally_mixed(3).unwrap();
        assert!((code_space_fidelity(&mixed).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn frame_composition_is_an_involution() {
        let f = LogicalFrame { z_frame: [true, false, true], logical_flip: true };
        let g = LogicalFrame { z_frame: [false, true, true], logical_flip: false };
        assert_eq!(f.compose(g).compose(g), f);
        assert_eq!(f.compose(f), LogicalFrame::default());
    }
}
