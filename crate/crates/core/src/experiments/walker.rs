//! Branch bookkeeping shared by all protocols.
//!
//! A protocol is written once as a sequence of operations on a set of
//! weighted paths. In exact mode every random event splits a path into all
//! of its outcomes; in Monte Carlo mode a single outcome is drawn and the
//! path keeps weight one.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::code::{stabilizers, LogicalFrame};
use crate::error::Result;
use crate::feedback::{apply_update, process_round};
use crate::measurement::{
    classify_outcome, flip_ancilla, measure_stabilizer, measurement_branches, AncillaState, AssignmentConvention,
    ReadoutResult, BRANCH_CUTOFF,
};
use crate::noise::{data_offset, DeviceParams};
use crate::qstate::{DensityOperator, Pauli, PauliString};

use super::RoundRecord;

pub(crate) enum Chooser<'a> {
    Exact,
    Sample(&'a mut ChaCha8Rng),
}

impl Chooser<'_> {
    fn choose<T>(&mut self, options: Vec<(f64, T)>) -> Vec<(f64, T)> {
        match self {
            Chooser::Exact => options.into_iter().filter(|(p, _)| *p >= BRANCH_CUTOFF).collect(),
            Chooser::Sample(rng) => {
                let total: f64 = options.iter().map(|(p, _)| p).sum();
                let draw = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let last = options.len() - 1;
                for (i, (p, item)) in options.into_iter().enumerate() {
                    acc += p;
                    if draw < acc || i == last {
                        return vec![(1.0, item)];
                    }
                }
                unreachable!("options are never empty")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Path {
    pub weight: f64,
    /// Ancilla at position 0, data qubits after it.
    pub state: DensityOperator,
    pub frame: LogicalFrame,
    pending: Vec<ReadoutResult>,
    pub rounds: Vec<RoundRecord>,
}

impl Path {
    pub fn new(state: DensityOperator) -> Self {
        Self { weight: 1.0, state, frame: LogicalFrame::default(), pending: Vec::new(), rounds: Vec::new() }
    }

    pub fn data(&self) -> Result<DensityOperator> {
        let n = self.state.n_qubits();
        let keep: Vec<usize> = (data_offset(&self.state)?..n).collect();
        if keep.len() == n {
            Ok(self.state.clone())
        } else {
            self.state.partial_trace(&keep)
        }
    }
}

pub(crate) fn map_states(
    paths: Vec<Path>,
    f: impl Fn(&DensityOperator) -> Result<DensityOperator>,
) -> Result<Vec<Path>> {
    paths
        .into_iter()
        .map(|mut p| {
            p.state = f(&p.state)?;
            Ok(p)
        })
        .collect()
}

/// Independent phase flips on the data qubits.
pub(crate) fn phase_flips(paths: Vec<Path>, probs: [f64; 3], ch: &mut Chooser) -> Result<Vec<Path>> {
    if let Chooser::Exact = ch {
        return map_states(paths, |s| crate::noise::phase_flips(s, probs));
    }
    let mut out = Vec::with_capacity(paths.len());
    for mut path in paths {
        let offset = data_offset(&path.state)?;
        let n = path.state.n_qubits();
        for (k, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let (_, flip) = ch.choose(vec![(1.0 - p, false), (p, true)]).remove(0);
            if flip {
                path.state = path.state.conjugate_pauli(&PauliString::single(n, offset + k, Pauli::Z))?;
            }
        }
        out.push(path);
    }
    Ok(out)
}

/// Classical ancilla flip with probability `p`.
pub(crate) fn ancilla_flip(paths: Vec<Path>, p: f64, ch: &mut Chooser) -> Result<Vec<Path>> {
    if p <= 0.0 {
        return Ok(paths);
    }
    let mut out = Vec::with_capacity(2 * paths.len());
    for path in paths {
        for (w, flip) in ch.choose(vec![(1.0 - p, false), (p, true)]) {
            let mut next = path.clone();
            next.weight *= w;
            if flip {
                next.state = flip_ancilla(&next.state)?;
            }
            out.push(next);
        }
    }
    Ok(out)
}

/// Measures generator `which` (0 or 1), resetting the ancilla after a `1` report.
pub(crate) fn measure(
    paths: Vec<Path>,
    which: usize,
    conv: AssignmentConvention,
    params: &DeviceParams,
    ch: &mut Chooser,
) -> Result<Vec<Path>> {
    let mut out = Vec::with_capacity(6 * paths.len());
    for path in paths {
        // Later rounds run in the basis adapted to the frame: a pending Z on a
        // qubit of the generator flips the meaning of its outcome.
        let generator = stabilizers()[which].clone();
        let generator = if path.frame.sign_for(&generator) < 0.0 { generator.negated() } else { generator };
        let stab = generator.padded_front(data_offset(&path.state)?);
        let branches: Vec<(f64, ReadoutResult, DensityOperator)> = match ch {
            Chooser::Exact => measurement_branches(&path.state, &stab, conv.plus[which], params)?
                .into_iter()
                .map(|b| (b.probability, b.result, b.state))
                .collect(),
            Chooser::Sample(rng) => {
                let (r, s) = measure_stabilizer(&path.state, &stab, conv.plus[which], params, &mut **rng)?;
                vec![(1.0, r, s)]
            }
        };
        for (w, result, state) in branches {
            let mut next = path.clone();
            next.weight *= w;
            next.state = if result.reported == AncillaState::One { flip_ancilla(&state)? } else { state };
            next.pending.push(result);
            out.push(next);
        }
    }
    Ok(out)
}

/// Closes a round of two measurements: the sequence imprints `XXX` on the
/// data when the number of true `+1` outcomes is odd, and the controller
/// updates the frame from the reports.
pub(crate) fn end_round(paths: Vec<Path>, conv: AssignmentConvention, feedback: bool) -> Result<Vec<Path>> {
    paths
        .into_iter()
        .map(|mut path| {
            let [a, b] = <[ReadoutResult; 2]>::try_from(std::mem::take(&mut path.pending))
                .map_err(|v| crate::Error::InvalidArgument(format!("round closed after {} measurements", v.len())))?;
            let true_plus = [a, b].iter().filter(|r| r.true_outcome.is_plus()).count();
            if true_plus % 2 == 1 {
                let offset = data_offset(&path.state)?;
                path.state = path.state.conjugate_pauli(&crate::code::logical_flip_operator().padded_front(offset))?;
            }
            let reported = [a.reported, b.reported];
            let mut update = process_round(reported, conv);
            if !feedback {
                update = update.without_correction();
            }
            path.frame = apply_update(path.frame, update);
            path.rounds.push(RoundRecord {
                reported,
                true_syndrome: crate::code::Syndrome::new(a.true_outcome, b.true_outcome),
                detected: classify_outcome(reported, conv),
                update,
            });
            Ok(path)
        })
        .collect()
}

/// One full stabilizer round.
pub(crate) fn stabilizer_round(
    paths: Vec<Path>,
    conv: AssignmentConvention,
    params: &DeviceParams,
    feedback: bool,
    ch: &mut Chooser,
) -> Result<Vec<Path>> {
    let paths = measure(paths, 0, conv, params, ch)?;
    let paths = measure(paths, 1, conv, params, ch)?;
    end_round(paths, conv, feedback)
}

/// Preparation errors: input phase flips, then depolarizing inside the code space.
pub(crate) fn prepare(paths: Vec<Path>, params: &DeviceParams, ch: &mut Chooser) -> Result<Vec<Path>> {
    let paths = phase_flips(paths, params.p_in, ch)?;
    map_states(paths, |s| crate::noise::logical_depolarize(s, params.prep_code_fidelity))
}

/// Ancilla in `|0>` followed by the encoded state of `basis`.
pub(crate) fn start(basis: crate::code::LogicalBasis) -> Result<Path> {
    Ok(Path::new(DensityOperator::basis(1, 0)?.tensor(&basis.encoded())?))
}
