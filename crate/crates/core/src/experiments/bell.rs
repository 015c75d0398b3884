//! Deterministic two-qubit entanglement by one `XX` measurement and feedback.

use serde::{Deserialize, Serialize};

use rand::Rng;

use super::{RunMode, RunOptions};
use crate::error::{check_probability, Error, Result};
use crate::measurement::{measure_stabilizer, measurement_branches, AssignmentConvention};
use crate::noise::DeviceParams;
use crate::parallel::{map_trials, trial_rng};
use crate::qstate::{DensityOperator, Outcome};

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellResult {
    pub pair: [usize; 2],
    /// Fidelity with `(|00> + |11>)/√2` averaged over both branches.
    pub fidelity: f64,
    pub stderr: f64,
    /// Probability of reporting `+1` and `-1`.
    pub branch_probability: [f64; 2],
    /// Post-selected fidelity of each reported branch.
    pub branch_fidelity: [Option<f64>; 2],
    pub trials: u64,
}

/// Data-qubit state after feedback, for one reported outcome.
#[derive(Clone, Debug)]
pub struct BellBranch {
    pub reported: Outcome,
    pub probability: f64,
    pub state: DensityOperator,
}

fn target() -> [Complex64; 4] {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    [h, z, z, h]
}

/// `F |00><00| + (1 - F)/3` on each other basis state.
fn initial_weights(f: f64) -> [f64; 4] {
    let rest = (1.0 - f) / 3.0;
    [f, rest, rest, rest]
}

fn check_pair(pair: [usize; 2]) -> Result<()> {
    if pair[0] == pair[1] || pair.iter().any(|&q| q >= crate::code::DATA_QUBITS) {
        return Err(Error::InvalidArgument(format!("invalid qubit pair {pair:?}")));
    }
    Ok(())
}

fn register(index: usize) -> Result<DensityOperator> {
    // Ancilla (position 0) in |0>, data pair in basis state `index`.
    DensityOperator::basis(3, index)
}

/// Feedback: a reported `-1` leaves `(|00> - |11>)/√2`, which a frame `Z`
/// on the first qubit maps to the target. The frame is applied to the state
/// here so both branches can be compared directly.
fn corrected_data(state: &DensityOperator, reported: Outcome) -> Result<DensityOperator> {
    let data = state.partial_trace(&[1, 2])?;
    if reported.is_plus() {
        Ok(data)
    } else {
        data.conjugate_pauli(&"ZI".parse()?)
    }
}

fn stabilizer() -> crate::qstate::PauliString {
    "IXX".parse().expect("valid Pauli string")
}

/// Exact post-feedback branches.
pub fn bell_branches(params: &DeviceParams, conv: AssignmentConvention) -> Result<Vec<BellBranch>> {
    params.validate()?;
    let mut sums: [Option<(f64, DensityOperator)>; 2] = [None, None];
    for (index, w) in initial_weights(params.init_fidelity_two_qubit).into_iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        for b in measurement_branches(&register(index)?, &stabilizer(), conv.plus[0], params)? {
            let reported = conv.outcome_for(0, b.result.reported);
            let data = corrected_data(&b.state, reported)?;
            let p = w * b.probability;
            let slot = &mut sums[usize::from(!reported.is_plus())];
            *slot = Some(match slot.take() {
                None => (p, data),
                Some((q, acc)) => (q + p, DensityOperator::mixture(&[(q / (q + p), &acc), (p / (q + p), &data)])?),
            });
        }
    }
    Ok([Outcome::Plus, Outcome::Minus]
        .into_iter()
        .zip(sums)
        .filter_map(|(reported, s)| s.map(|(probability, state)| BellBranch { reported, probability, state }))
        .collect())
}

pub fn run_bell(
    pair: [usize; 2],
    params: &DeviceParams,
    conv: AssignmentConvention,
    opts: &RunOptions,
) -> Result<BellResult> {
    check_pair(pair)?;
    params.validate()?;
    check_probability("init_fidelity_two_qubit", params.init_fidelity_two_qubit)?;
    match opts.mode {
        RunMode::Exact => {
            let mut result = BellResult {
                pair,
                fidelity: 0.0,
                stderr: 0.0,
                branch_probability: [0.0; 2],
                branch_fidelity: [None; 2],
                trials: 0,
            };
            for b in bell_branches(params, conv)? {
                let i = usize::from(!b.reported.is_plus());
                let f = b.state.fidelity_with_pure(&target())?;
                result.branch_probability[i] = b.probability;
                result.branch_fidelity[i] = Some(f);
                result.fidelity += b.probability * f;
            }
            Ok(result)
        }
        RunMode::MonteCarlo => {
            if opts.trials == 0 {
                return Err(Error::InvalidArgument("trials must be at least 1".into()));
            }
            let weights = initial_weights(params.init_fidelity_two_qubit);
            let samples = map_trials(opts.trials, opts.execution, |i| {
                let mut rng = trial_rng(opts.seed, 0, i);
                let draw = rng.random::<f64>();
                let mut acc = 0.0;
                let mut index = 3;
                for (k, w) in weights.iter().enumerate() {
                    acc += w;
                    if draw < acc {
                        index = k;
                        break;
                    }
                }
                let (r, state) = measure_stabilizer(&register(index)?, &stabilizer(), conv.plus[0], params, &mut rng)?;
                let reported = conv.outcome_for(0, r.reported);
                let f = corrected_data(&state, reported)?.fidelity_with_pure(&target())?;
                Ok((usize::from(!reported.is_plus()), f))
            })?;
            let n = samples.len() as f64;
            let mut count = [0.0; 2];
            let mut sum = [0.0; 2];
            let mut sumsq = 0.0;
            for (i, f) in &samples {
                count[*i] += 1.0;
                sum[*i] += f;
                sumsq += f * f;
            }
            let mean = (sum[0] + sum[1]) / n;
            let var = (sumsq / n - mean * mean).max(0.0);
            Ok(BellResult {
                pair,
                fidelity: mean,
                stderr: if n > 1.0 { (var / (n - 1.0)).sqrt() } else { 0.0 },
                branch_probability: count.map(|c| c / n),
                branch_fidelity: [0, 1].map(|i| (count[i] > 0.0).then(|| sum[i] / count[i])),
                trials: opts.trials,
            })
        }
    }
}
