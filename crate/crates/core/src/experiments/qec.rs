//! Encoding, single-round and multi-round correction under applied phase errors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::walker::{map_states, phase_flips, prepare, stabilizer_round, start, Chooser, Path};
use super::{logical_groups, sweep, ConventionChoice, Estimator, Group, Leaf, RunMode, RunOptions, SweepResult};
use crate::code::{
    code_space_fidelity, logical_observables, majority_vote_xl, process_fidelity, LogicalBasis, LogicalFrame,
    LogicalReadout, LogicalStateFidelities,
};
use crate::error::{check_range, Error, Result};
use crate::measurement::AssignmentConvention;
use crate::noise::{per_round_probability, phase_flip_channel, DeviceParams};
use crate::qstate::{DensityOperator, Pauli, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleRoundVariant {
    /// A single physical qubit with ideal preparation.
    Unencoded,
    /// Encoded and left idle, no stabilizer measurement.
    EncodedIdle,
    Qec,
    /// Stabilizers are measured but detected errors are not corrected.
    NoFeedback,
}

impl SingleRoundVariant {
    pub const ALL: [SingleRoundVariant; 4] = [Self::Unencoded, Self::EncodedIdle, Self::Qec, Self::NoFeedback];

    pub fn name(self) -> &'static str {
        match self {
            Self::Unencoded => "unencoded",
            Self::EncodedIdle => "encoded_idle",
            Self::Qec => "qec",
            Self::NoFeedback => "no_feedback",
        }
    }
}

impl fmt::Display for SingleRoundVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SingleRoundVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown single-round variant {s:?}")))
    }
}

fn check_grid(grid: &[f64], hi: f64, range: &'static str) -> Result<()> {
    for &p in grid {
        check_range("p_e", p, 0.0, hi, range)?;
    }
    Ok(())
}

fn physical_state(basis: LogicalBasis) -> Result<DensityOperator> {
    let (a, b) = basis.amplitudes();
    DensityOperator::pure(&[a, b])
}

fn unencoded_leaf(basis: LogicalBasis, p_e: f64, ch: &mut Chooser) -> Result<Vec<Leaf>> {
    // The walker's phase flips act on the last three positions, so the
    // single qubit gets its own two-branch treatment here.
    let state = physical_state(basis)?;
    let flipped = state.conjugate_pauli(&"Z".parse()?)?;
    let options = match ch {
        Chooser::Exact => vec![(1.0, state.apply_channel(&phase_flip_channel(p_e)?, &[0])?)],
        Chooser::Sample(_) => vec![(1.0 - p_e, state), (p_e, flipped)],
    };
    let mut out = Vec::new();
    for (w, s) in sample_or_all(options, ch) {
        let mut e = [0.0; 3];
        for (k, name) in ["X", "Y", "Z"].into_iter().enumerate() {
            e[k] = s.expectation(&name.parse::<PauliString>()?)?;
        }
        out.push(Leaf { weight: w, value: basis.fidelity(e), rounds: Vec::new(), frame: LogicalFrame::default() });
    }
    Ok(out)
}

fn sample_or_all<T>(options: Vec<(f64, T)>, ch: &mut Chooser) -> Vec<(f64, T)> {
    match ch {
        Chooser::Exact => options,
        Chooser::Sample(rng) => {
            use rand::Rng;
            let draw = rng.random::<f64>();
            let mut acc = 0.0;
            let last = options.len() - 1;
            for (i, (p, item)) in options.into_iter().enumerate() {
                acc += p;
                if draw < acc || i == last {
                    return vec![(1.0, item)];
                }
            }
            unreachable!()
        }
    }
}

fn logical_leaf(path: &Path, basis: LogicalBasis, readout: LogicalReadout) -> Result<Leaf> {
    let e = logical_observables(&path.data()?, &path.frame, readout)?;
    Ok(Leaf::from_path(path, basis.fidelity(e)))
}

/// Process fidelity after one round of phase errors with probability `p_e`
/// on every qubit, for each `p_e` in `pe_grid`.
pub fn run_single_round_qec(
    pe_grid: &[f64],
    params: &DeviceParams,
    conv: ConventionChoice,
    variant: SingleRoundVariant,
    opts: &RunOptions,
) -> Result<SweepResult> {
    params.validate()?;
    check_grid(pe_grid, 1.0, "[0, 1]")?;
    let conventions = match variant {
        SingleRoundVariant::Qec | SingleRoundVariant::NoFeedback => conv.conventions(),
        _ => Vec::new(),
    };
    let groups: Vec<Group> = if conventions.is_empty() {
        LogicalBasis::ALL.iter().map(|&b| Group { basis: Some(b), convention: None }).collect()
    } else {
        logical_groups(&LogicalBasis::ALL, &conventions)
    };
    let label = match variant {
        SingleRoundVariant::Qec | SingleRoundVariant::NoFeedback => format!("{variant}:{conv}"),
        _ => variant.to_string(),
    };
    sweep("single_round_qec", label, pe_grid, &groups, Estimator::process(groups.len()), opts, |p_e, g, ch| {
        let basis = groups[g].basis.expect("logical group");
        if variant == SingleRoundVariant::Unencoded {
            return unencoded_leaf(basis, p_e, ch);
        }
        let mut paths = prepare(vec![start(basis)?], params, ch)?;
        paths = phase_flips(paths, [p_e; 3], ch)?;
        if let Some(c) = groups[g].convention {
            paths = stabilizer_round(paths, c, params, variant == SingleRoundVariant::Qec, ch)?;
        }
        paths.iter().map(|p| logical_leaf(p, basis, opts.readout)).collect()
    })
}

/// Mean `|+X>_L`/`|-X>_L` fidelity when a total error `p_e` is spread over
/// `n_rounds` rounds: `n_rounds - 1` stabilizer rounds with feedback and a
/// final majority vote.
pub fn run_multi_round_qec(
    n_rounds: u32,
    pe_grid: &[f64],
    params: &DeviceParams,
    conv: ConventionChoice,
    opts: &RunOptions,
) -> Result<SweepResult> {
    params.validate()?;
    if n_rounds == 0 || (opts.mode == RunMode::Exact && n_rounds > 3) {
        return Err(Error::InvalidArgument(format!(
            "rounds must be 1..=3 in exact mode and at least 1 otherwise, got {n_rounds}"
        )));
    }
    check_grid(pe_grid, 0.5, "[0, 0.5]")?;
    let bases = [LogicalBasis::PlusX, LogicalBasis::MinusX];
    let groups = logical_groups(&bases, &conv.conventions());
    let label = format!("rounds={n_rounds}:{conv}");
    sweep("multi_round_qec", label, pe_grid, &groups, Estimator::mean(groups.len()), opts, |p_e, g, ch| {
        let Group { basis, convention } = groups[g];
        let (basis, convention) = (basis.expect("logical group"), convention.expect("convention"));
        let p_n = per_round_probability(p_e, n_rounds)?;
        let mut paths = prepare(vec![start(basis)?], params, ch)?;
        for round in 0..n_rounds {
            paths = phase_flips(paths, [p_n; 3], ch)?;
            if round + 1 < n_rounds {
                paths = stabilizer_round(paths, convention, params, true, ch)?;
            }
        }
        let sign = basis.axis().1;
        paths
            .iter()
            .map(|p| Ok(Leaf::from_path(p, 0.5 * (1.0 + sign * majority_vote_xl(&p.data()?, &p.frame)?))))
            .collect()
    })
}

/// One stabilizer round after a deliberate `Z` on data qubit `error`
/// (`0..3`, or none). Returns every branch as `(probability, [<X_L>, <Y_L>, <Z_L>])`.
pub fn correct_injected_error(
    basis: LogicalBasis,
    error: Option<usize>,
    params: &DeviceParams,
    conv: AssignmentConvention,
    feedback: bool,
    readout: LogicalReadout,
) -> Result<Vec<(f64, [f64; 3])>> {
    params.validate()?;
    if let Some(q) = error.filter(|q| *q >= 3) {
        return Err(Error::InvalidArgument(format!("data qubit {q} is not in 0..3")));
    }
    let ch = &mut Chooser::Exact;
    let mut paths = prepare(vec![start(basis)?], params, ch)?;
    if let Some(q) = error {
        paths = map_states(paths, |s| s.conjugate_pauli(&PauliString::single(4, 1 + q, Pauli::Z)))?;
    }
    paths = stabilizer_round(paths, conv, params, feedback, ch)?;
    paths.iter().map(|p| Ok((p.weight, logical_observables(&p.data()?, &p.frame, readout)?))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingReport {
    pub states: Vec<EncodedStateReport>,
    /// Code-space fidelity averaged over the six states.
    pub code_space_fidelity: f64,
    pub process_fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedStateReport {
    pub basis: LogicalBasis,
    pub code_space_fidelity: f64,
    pub logical_fidelity: f64,
}

/// Exact tomography summary of the six freshly encoded states.
pub fn run_encoding(params: &DeviceParams, readout: LogicalReadout) -> Result<EncodingReport> {
    params.validate()?;
    let mut states = Vec::new();
    for basis in LogicalBasis::ALL {
        let path = prepare(vec![start(basis)?], params, &mut Chooser::Exact)?.remove(0);
        let data = path.data()?;
        let e = logical_observables(&data, &path.frame, readout)?;
        states.push(EncodedStateReport {
            basis,
            code_space_fidelity: code_space_fidelity(&data)?,
            logical_fidelity: basis.fidelity(e),
        });
    }
    let fids = LogicalStateFidelities::from_fn(|b| {
        states.iter().find(|s| s.basis == b).map(|s| s.logical_fidelity).unwrap_or(0.0)
    });
    Ok(EncodingReport {
        code_space_fidelity: states.iter().map(|s| s.code_space_fidelity).sum::<f64>() / 6.0,
        process_fidelity: process_fidelity(&fids)?,
        states,
    })
}
