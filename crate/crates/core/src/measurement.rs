//! Stabilizer readout through the ancilla.
//!
//! The controlled-rotation circuit is modelled by its net effect: the data
//! qubits are projected onto an eigenspace of the stabilizer, the ancilla
//! ends up in the state the assignment convention associates with that
//! eigenvalue, and the optical readout reports that state with an asymmetric
//! fidelity. The ancilla is register position 0.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::Syndrome;
use crate::error::{check_range, Error, Result};
use crate::noise::DeviceParams;
use crate::qstate::{DensityOperator, Outcome, Pauli, PauliString};

/// Ancilla register position.
pub const ANCILLA: usize = 0;

/// Branches lighter than this are dropped during enumeration.
pub const BRANCH_CUTOFF: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AncillaState {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
}

impl AncillaState {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            AncillaState::One
        } else {
            AncillaState::Zero
        }
    }

    pub fn bit(self) -> bool {
        self == AncillaState::One
    }

    pub fn flipped(self) -> Self {
        Self::from_bit(!self.bit())
    }
}

impl fmt::Display for AncillaState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.bit() { "1" } else { "0" })
    }
}

/// Ancilla state assigned to the `+1` outcome of each of the two generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AssignmentConvention {
    pub plus: [AncillaState; 2],
}

impl AssignmentConvention {
    pub const ALL: [AssignmentConvention; 4] = [
        Self::new(AncillaState::Zero, AncillaState::Zero),
        Self::new(AncillaState::Zero, AncillaState::One),
        Self::new(AncillaState::One, AncillaState::Zero),
        Self::new(AncillaState::One, AncillaState::One),
    ];

    /// The best-read ancilla state (`1`) on the no-error syndrome.
    pub const OPTIMAL: AssignmentConvention = Self::new(AncillaState::One, AncillaState::One);

    pub const fn new(first: AncillaState, second: AncillaState) -> Self {
        Self { plus: [first, second] }
    }

    /// Ancilla state produced by `outcome` of generator `which` (0 or 1).
    pub fn ancilla_for(self, which: usize, outcome: Outcome) -> AncillaState {
        if outcome.is_plus() {
            self.plus[which]
        } else {
            self.plus[which].flipped()
        }
    }

    /// Stabilizer outcome a reported ancilla state stands for.
    pub fn outcome_for(self, which: usize, reported: AncillaState) -> Outcome {
        if reported == self.plus[which] {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

impl fmt::Display for AssignmentConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.plus[0], self.plus[1])
    }
}

impl FromStr for AssignmentConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<AncillaState> = s
            .trim_matches(|c| c == '{' || c == '}')
            .chars()
            .filter(|c| *c != ',' && !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(AncillaState::Zero),
                '1' => Ok(AncillaState::One),
                _ => Err(Error::InvalidArgument(format!("bad convention {s:?}"))),
            })
            .collect::<Result<_>>()?;
        match bits.as_slice() {
            [a, b] => Ok(Self::new(*a, *b)),
            _ => Err(Error::InvalidArgument(format!("convention {s:?} needs two bits"))),
        }
    }
}

impl TryFrom<String> for AssignmentConvention {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AssignmentConvention> for String {
    fn from(c: AssignmentConvention) -> String {
        c.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadoutResult {
    pub reported: AncillaState,
    pub true_outcome: Outcome,
    /// `false` when the ancilla was left opposite to the reported state.
    pub ancilla_post_ok: bool,
}

/// One classical readout event for a given true ancilla state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReadoutEvent {
    pub reported: AncillaState,
    /// Ancilla state left behind by the readout.
    pub left: AncillaState,
    pub probability: f64,
}

/// All readout events for an ancilla truly in `actual`.
///
/// The readout leaves the ancilla in the reported state, except that a
/// correctly assigned `0` is followed by a spurious flip with probability
/// `1 - post_measurement_fidelity`.
pub fn readout_events(actual: AncillaState, params: &DeviceParams) -> Vec<ReadoutEvent> {
    let f = params.readout_fidelity(actual.bit());
    let wrong = ReadoutEvent { reported: actual.flipped(), left: actual.flipped(), probability: 1.0 - f };
    match actual {
        AncillaState::Zero => {
            let keep = params.post_measurement_fidelity;
            vec![
                ReadoutEvent { reported: actual, left: actual, probability: f * keep },
                ReadoutEvent { reported: actual, left: actual.flipped(), probability: f * (1.0 - keep) },
                wrong,
            ]
        }
        AncillaState::One => vec![ReadoutEvent { reported: actual, left: actual, probability: f }, wrong],
    }
}

/// Reference state of the ancilla, which must be a computational basis state.
pub fn ancilla_reference(state: &DensityOperator) -> Result<AncillaState> {
    let pop = state.excited_population(ANCILLA);
    if pop.abs() < 1e-9 {
        Ok(AncillaState::Zero)
    } else if (pop - 1.0).abs() < 1e-9 {
        Ok(AncillaState::One)
    } else {
        Err(Error::InvalidAncilla(pop))
    }
}

/// Flips the ancilla (reset after a `1` report, or a relaxation event).
pub fn flip_ancilla(state: &DensityOperator) -> Result<DensityOperator> {
    state.conjugate_pauli(&PauliString::single(state.n_qubits(), ANCILLA, Pauli::X))
}

/// One outcome of [`measurement_branches`].
#[derive(Clone, Debug)]
pub struct MeasurementBranch {
    pub result: ReadoutResult,
    pub probability: f64,
    pub state: DensityOperator,
}

/// Exact enumeration of a stabilizer readout: projective outcome × readout
/// event. `plus_state` is the ancilla state the convention assigns to `+1`.
pub fn measurement_branches(
    state: &DensityOperator,
    stab: &PauliString,
    plus_state: AncillaState,
    params: &DeviceParams,
) -> Result<Vec<MeasurementBranch>> {
    let reference = check_stabilizer(state, stab)?;
    let mut out = Vec::with_capacity(6);
    for outcome in [Outcome::Plus, Outcome::Minus] {
        let (projected, p) = match state.project(stab, outcome) {
            Ok(v) => v,
            Err(Error::ZeroProbabilityBranch) => continue,
            Err(e) => return Err(e),
        };
        if p < BRANCH_CUTOFF {
            continue;
        }
        let actual = true_ancilla(reference, outcome, plus_state);
        for ev in readout_events(actual, params) {
            let probability = p * ev.probability;
            if probability < BRANCH_CUTOFF {
                continue;
            }
            out.push(MeasurementBranch {
                result: ReadoutResult {
                    reported: ev.reported,
                    true_outcome: outcome,
                    ancilla_post_ok: ev.left == ev.reported,
                },
                probability,
                state: set_ancilla(&projected, reference, ev.left)?,
            });
        }
    }
    Ok(out)
}

/// Sampled stabilizer readout.
pub fn measure_stabilizer<R: Rng + ?Sized>(
    state: &DensityOperator,
    stab: &PauliString,
    plus_state: AncillaState,
    params: &DeviceParams,
    rng: &mut R,
) -> Result<(ReadoutResult, DensityOperator)> {
    let reference = check_stabilizer(state, stab)?;
    let projected = state.measure_projective(stab, rng.random::<f64>())?;
    let actual = true_ancilla(reference, projected.outcome, plus_state);
    let events = readout_events(actual, params);
    let draw = rng.random::<f64>();
    let mut acc = 0.0;
    let mut chosen = events[events.len() - 1];
    for ev in &events {
        acc += ev.probability;
        if draw < acc {
            chosen = *ev;
            break;
        }
    }
    let result = ReadoutResult {
        reported: chosen.reported,
        true_outcome: projected.outcome,
        ancilla_post_ok: chosen.left == chosen.reported,
    };
    Ok((result, set_ancilla(&projected.state, reference, chosen.left)?))
}

fn check_stabilizer(state: &DensityOperator, stab: &PauliString) -> Result<AncillaState> {
    if stab.len() != state.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "stabilizer of length {} on a {}-qubit register",
            stab.len(),
            state.n_qubits()
        )));
    }
    if stab.letters()[ANCILLA] != Pauli::I {
        return Err(Error::InvalidArgument("stabilizer must not act on the ancilla".into()));
    }
    ancilla_reference(state)
}

fn true_ancilla(reference: AncillaState, outcome: Outcome, plus_state: AncillaState) -> AncillaState {
    let mapped = if outcome.is_plus() { plus_state } else { plus_state.flipped() };
    AncillaState::from_bit(reference.bit() ^ mapped.bit())
}

fn set_ancilla(state: &DensityOperator, from: AncillaState, to: AncillaState) -> Result<DensityOperator> {
    if from == to {
        Ok(state.clone())
    } else {
        flip_ancilla(state)
    }
}

/// Syndrome implied by the two reported ancilla states.
pub fn classify_outcome(reported: [AncillaState; 2], conv: AssignmentConvention) -> Syndrome {
    Syndrome::new(conv.outcome_for(0, reported[0]), conv.outcome_for(1, reported[1]))
}

/// Probability that both readouts of syndrome category `category` are assigned correctly.
pub fn syndrome_readout_fidelity(category: usize, conv: AssignmentConvention, params: &DeviceParams) -> f64 {
    let s = syndrome_of_category(category);
    let f = |which: usize, o: Outcome| params.readout_fidelity(conv.ancilla_for(which, o).bit());
    f(0, s.s1) * f(1, s.s2)
}

/// Inverse of [`Syndrome::category`].
pub fn syndrome_of_category(category: usize) -> Syndrome {
    use Outcome::{Minus, Plus};
    match category {
        0 => Syndrome::new(Plus, Plus),
        1 => Syndrome::new(Minus, Plus),
        2 => Syndrome::new(Minus, Minus),
        3 => Syndrome::new(Plus, Minus),
        _ => panic!("syndrome category {category} out of range"),
    }
}

/// Mean probability that a round's syndrome is read correctly when every
/// qubit has flipped with probability `p_e`:
/// `F(0) + (F(1) + F(2) + F(3) - 3 F(0)) (p_e - p_e^2)`.
pub fn effective_measurement_fidelity(p_e: f64, conv: AssignmentConvention, params: &DeviceParams) -> Result<f64> {
    check_range("p_e", p_e, 0.0, 1.0, "[0, 1]")?;
    let f: Vec<f64> = (0..4).map(|i| syndrome_readout_fidelity(i, conv, params)).collect();
    Ok(f[0] + (f[1] + f[2] + f[3] - 3.0 * f[0]) * (p_e - p_e * p_e))
}

/// [`effective_measurement_fidelity`] averaged over the four conventions.
pub fn symmetrized_measurement_fidelity(p_e: f64, params: &DeviceParams) -> Result<f64> {
    let mut total = 0.0;
    for conv in AssignmentConvention::ALL {
        total += effective_measurement_fidelity(p_e, conv, params)?;
    }
    Ok(total / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{stabilizers, LogicalBasis};
    use crate::qstate::max_abs_diff_for_tests;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn with_ancilla(data: &DensityOperator) -> DensityOperator {
        DensityOperator::basis(1, 0).unwrap().tensor(data).unwrap()
    }

    fn gens() -> [PauliString; 2] {
        stabilizers().map(|s| s.padded_front(1))
    }

    #[test]
    fn convention_parsing_and_mapping() {
        for c in AssignmentConvention::ALL {
            assert_eq!(c.to_string().parse::<AssignmentConvention>().unwrap(), c);
        }
        assert_eq!("{1,1}".parse::<AssignmentConvention>().unwrap(), AssignmentConvention::OPTIMAL);
        assert!("12".parse::<AssignmentConvention>().is_err());
        assert!("1".parse::<AssignmentConvention>().is_err());
    }

    #[test]
    fn classify_examples() {
        use AncillaState::{One, Zero};
        let c = |s: &str| s.parse::<AssignmentConvention>().unwrap();
        assert_eq!(classify_outcome([One, One], c("11")), Syndrome::NO_ERROR);
        assert_eq!(classify_outcome([Zero, One], c("01")), Syndrome::NO_ERROR);
        assert_eq!(classify_outcome([Zero, Zero], c("10")), Syndrome::new(Outcome::Minus, Outcome::Plus));
    }

    #[test]
    fn ideal_readout_of_eigenstate() {
        let params = DeviceParams::ideal();
        let s = with_ancilla(&LogicalBasis::Zero.encoded());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for conv in AssignmentConvention::ALL {
            for _ in 0..20 {
                let (r, _) = measure_stabilizer(&s, &gens()[0], conv.plus[0], &params, &mut rng).unwrap();
                assert_eq!(conv.outcome_for(0, r.reported), Outcome::Plus);
            }
        }
    }

    #[test]
    fn correct_no_error_report_probability() {
        let params = DeviceParams { post_measurement_fidelity: 1.0, ..DeviceParams::calibrated() };
        let conv = AssignmentConvention::OPTIMAL;
        let s = with_ancilla(&LogicalBasis::PlusX.encoded());
        let mut total = 0.0;
        for b1 in measurement_branches(&s, &gens()[0], conv.plus[0], &params).unwrap() {
            let mut st = b1.state.clone();
            if b1.result.reported.bit() {
                st = flip_ancilla(&st).unwrap();
            }
            for b2 in measurement_branches(&st, &gens()[1], conv.plus[1], &params).unwrap() {
                if classify_outcome([b1.result.reported, b2.result.reported], conv) == Syndrome::NO_ERROR {
                    total += b1.probability * b2.probability;
                }
            }
        }
        assert!((total - 0.988f64.powi(2)).abs() < 1e-12);
        assert!((total - 0.976).abs() < 1e-3);
    }

    #[test]
    fn z2_error_gives_minus_minus() {
        let params = DeviceParams::ideal();
        let data = LogicalBasis::PlusX.encoded().conjugate_pauli(&"IZI".parse().unwrap()).unwrap();
        let s = with_ancilla(&data);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (j, g) in gens().iter().enumerate() {
            let (r, _) = measure_stabilizer(&s, g, AncillaState::One, &params, &mut rng).unwrap();
            assert_eq!(r.true_outcome, Outcome::Minus, "generator {j}");
            assert_eq!(r.reported, AncillaState::Zero);
        }
    }

    #[test]
    fn ideal_back_action_matches_projective() {
        let params = DeviceParams::ideal();
        let data =
            LogicalBasis::PlusY.encoded().apply_channel(&crate::noise::phase_flip_channel(0.3).unwrap(), &[0]).unwrap();
        let s = with_ancilla(&data);
        let stab = gens()[0].clone();
        let branches = measurement_branches(&s, &stab, AncillaState::Zero, &params).unwrap();
        for b in &branches {
            let (want, p) = s.project(&stab, b.result.true_outcome).unwrap();
            assert!((b.probability - p).abs() < 1e-12);
            // With ancilla state 0 for +1 and 1 for -1 the ancilla records the outcome.
            let expected = if b.result.true_outcome.is_plus() { want } else { flip_ancilla(&want).unwrap() };
            assert!(max_abs_diff_for_tests(&b.state, &expected) < 1e-12);
        }
    }

    #[test]
    fn misassignment_leaves_data_untouched() {
        let params = DeviceParams::calibrated();
        let s = with_ancilla(
            &LogicalBasis::PlusX
                .encoded()
                .apply_channel(&crate::noise::phase_flip_channel(0.2).unwrap(), &[2])
                .unwrap(),
        );
        let branches = measurement_branches(&s, &gens()[1], AncillaState::One, &params).unwrap();
        for a in &branches {
            for b in &branches {
                if a.result.true_outcome == b.result.true_outcome {
                    let da = a.state.partial_trace(&[1, 2, 3]).unwrap();
                    let db = b.state.partial_trace(&[1, 2, 3]).unwrap();
                    assert!(max_abs_diff_for_tests(&da, &db) < 1e-15);
                }
            }
        }
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_report_error_rates() {
        let params = DeviceParams::calibrated();
        let s = with_ancilla(&LogicalBasis::Zero.encoded());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        for plus in [AncillaState::Zero, AncillaState::One] {
            let wrong = (0..n)
                .filter(|_| measure_stabilizer(&s, &gens()[0], plus, &params, &mut rng).unwrap().0.reported != plus)
                .count() as f64;
            let p = 1.0 - params.readout_fidelity(plus.bit());
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((wrong / n as f64 - p).abs() < 3.0 * se, "{plus}: {}", wrong / n as f64);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = DeviceParams::calibrated();
        let s = with_ancilla(&LogicalBasis::Zero.encoded());
        let touching: PauliString = "XXXI".parse().unwrap();
        assert!(measurement_branches(&s, &touching, AncillaState::One, &params).is_err());
        let h = crate::qstate::hadamard();
        let bad = s.apply_unitary(&h, &[0]).unwrap();
        assert!(matches!(
            measurement_branches(&bad, &gens()[0], AncillaState::One, &params),
            Err(Error::InvalidAncilla(_))
        ));
    }

    #[test]
    fn effective_fidelity_examples() {
        let params = DeviceParams::calibrated();
        let f = effective_measurement_fidelity(0.0, AssignmentConvention::OPTIMAL, &params).unwrap();
        assert!((f - 0.988f64.powi(2)).abs() < 1e-15);
        let mean = 0.5 * (params.f0_readout + params.f1_readout);
        for p in [0.0, 0.1, 0.25, 0.5, 0.8] {
            let s = symmetrized_measurement_fidelity(p, &params).unwrap();
            assert!((s - mean * mean).abs() < 1e-12);
        }
        let ideal = DeviceParams::ideal();
        for conv in AssignmentConvention::ALL {
            for p in [0.0, 0.3, 1.0] {
                assert_eq!(effective_measurement_fidelity(p, conv, &ideal).unwrap(), 1.0);
            }
        }
        assert!(effective_measurement_fidelity(1.2, AssignmentConvention::OPTIMAL, &params).is_err());
    }
}
