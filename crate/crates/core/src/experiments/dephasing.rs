//! Storage under natural quasistatic dephasing, sampled trial by trial.
//!
//! Each trial draws one detuning per qubit and keeps it for the whole
//! sequence. Stabilizer rounds sit at half the storage time; qubit
//! relaxation acts during the two free-evolution halves and the ancilla may
//! relax during each round.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::walker::{ancilla_flip, map_states, prepare, stabilizer_round, start, Chooser, Path};
use super::{logical_groups, sweep, Estimator, Group, Leaf, RunMode, RunOptions, SweepResult};
use crate::code::{majority_vote_xl, LogicalBasis, LogicalFrame};
use crate::error::{Error, Result};
use crate::measurement::AssignmentConvention;
use crate::noise::{
    ancilla_flip_probability, coherent_dephase, depolarize, relaxation_survival, sample_detuning, DetuningSample,
    DeviceParams,
};
use crate::qstate::{DensityOperator, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingVariant {
    /// Best physical qubit (qubit 3), no encoding.
    UnencodedBest,
    EncodedMajorityOnly,
    Qec,
    NoFeedback,
}

impl DephasingVariant {
    pub const ALL: [DephasingVariant; 4] =
        [Self::UnencodedBest, Self::EncodedMajorityOnly, Self::Qec, Self::NoFeedback];

    pub fn name(self) -> &'static str {
        match self {
            Self::UnencodedBest => "unencoded_best",
            Self::EncodedMajorityOnly => "encoded_majority_only",
            Self::Qec => "qec",
            Self::NoFeedback => "no_feedback",
        }
    }
}

impl fmt::Display for DephasingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DephasingVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown dephasing variant {s:?}")))
    }
}

const BEST_QUBIT: usize = 2;

/// Free evolution of the data qubits from `t0` to `t1`.
fn evolve(
    state: &DensityOperator,
    delta: &DetuningSample,
    t0: f64,
    t1: f64,
    params: &DeviceParams,
) -> Result<DensityOperator> {
    let mut s = coherent_dephase(state, delta, t1 - t0)?;
    let offset = s.n_qubits() - 3;
    for k in 0..3 {
        let t1_k = params.t1_qubit.map(|v| v[k]);
        let retention = relaxation_survival(t1, t1_k) / relaxation_survival(t0, t1_k);
        s = depolarize(&s, offset + k, retention)?;
    }
    Ok(s)
}

fn unencoded(basis: LogicalBasis, delta: &DetuningSample, t: f64, params: &DeviceParams) -> Result<f64> {
    let (a, b) = basis.amplitudes();
    let s = DensityOperator::pure(&[a, b])?.rotate_z(&[(0, delta.delta[BEST_QUBIT] * t)])?;
    let s = depolarize(&s, 0, relaxation_survival(t, params.t1_qubit.map(|v| v[BEST_QUBIT])))?;
    Ok(0.5 * (1.0 + basis.axis().1 * s.expectation(&"X".parse::<PauliString>()?)?))
}

/// Mean `|±X>_L` fidelity after storage time `t` for each `t` in `times`.
/// Monte Carlo only.
pub fn run_natural_dephasing(
    times: &[f64],
    params: &DeviceParams,
    variant: DephasingVariant,
    conv: AssignmentConvention,
    opts: &RunOptions,
) -> Result<SweepResult> {
    params.validate()?;
    if opts.mode == RunMode::Exact {
        return Err(Error::Unsupported(
            "natural dephasing has a continuous detuning distribution; use monte_carlo".into(),
        ));
    }
    if let Some(&t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::OutOfRange { name: "storage time", value: t, range: "[0, inf)" });
    }
    let bases = [LogicalBasis::PlusX, LogicalBasis::MinusX];
    let groups: Vec<Group> = match variant {
        DephasingVariant::Qec | DephasingVariant::NoFeedback => logical_groups(&bases, &[conv]),
        _ => bases.iter().map(|&b| Group { basis: Some(b), convention: None }).collect(),
    };
    let flip = ancilla_flip_probability(params.round_duration, params);
    sweep("natural_dephasing", variant.to_string(), times, &groups, Estimator::mean(groups.len()), opts, |t, g, ch| {
        let basis = groups[g].basis.expect("logical group");
        let Chooser::Sample(rng) = ch else {
            return Err(Error::Unsupported("exact enumeration".into()));
        };
        // Drawn first so every variant sees the same detuning in a given trial.
        let delta = sample_detuning(params, &mut **rng);
        if variant == DephasingVariant::UnencodedBest {
            let value = unencoded(basis, &delta, t, params)?;
            return Ok(vec![Leaf { weight: 1.0, value, rounds: Vec::new(), frame: LogicalFrame::default() }]);
        }
        let half = 0.5 * t;
        let mut paths: Vec<Path> = prepare(vec![start(basis)?], params, ch)?;
        match variant {
            DephasingVariant::Qec | DephasingVariant::NoFeedback => {
                paths = map_states(paths, |s| evolve(s, &delta, 0.0, half, params))?;
                paths = ancilla_flip(paths, flip, ch)?;
                paths = stabilizer_round(paths, conv, params, variant == DephasingVariant::Qec, ch)?;
                paths = map_states(paths, |s| evolve(s, &delta, half, t, params))?;
            }
            _ => paths = map_states(paths, |s| evolve(s, &delta, 0.0, t, params))?,
        }
        let sign = basis.axis().1;
        paths
            .iter()
            .map(|p| Ok(Leaf::from_path(p, 0.5 * (1.0 + sign * majority_vote_xl(&p.data()?, &p.frame)?))))
            .collect()
    })
}
