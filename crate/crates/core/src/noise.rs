//! Device constants and every error process acting on the data qubits.
//!
//! Durations are in milliseconds and detunings in rad/ms throughout.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::code::{logical_flip_operator, logical_y, logical_z, DATA_QUBITS};
use crate::error::{check_probability, check_range, Error, Result};
use crate::qstate::{DensityOperator, KrausChannel, Pauli, PauliString};

/// Physical constants of the modelled device.
///
/// `p_in` follows the per-qubit ordering obtained by inverting the measured
/// syndrome statistics of the encoded states: `(0.064, 0.091, 0.077)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    /// Readout fidelity of ancilla `|0>`.
    pub f0_readout: f64,
    /// Readout fidelity of ancilla `|1>`.
    pub f1_readout: f64,
    /// Probability the ancilla is still in `|0>` after a correctly assigned `0`.
    pub post_measurement_fidelity: f64,
    pub t2_star: [f64; 3],
    /// `None` disables qubit relaxation.
    pub t1_qubit: Option<[f64; 3]>,
    /// `None` disables ancilla relaxation.
    pub t1_ancilla: Option<f64>,
    /// Phase-error probability of each qubit right after encoding.
    pub p_in: [f64; 3],
    /// Retention of the logical Bloch vector after encoding. Applied as a
    /// depolarizing channel inside the code space, so it leaves syndrome
    /// statistics untouched.
    pub prep_code_fidelity: f64,
    pub round_duration: f64,
    /// Fidelity of the `|00>` preparation used for two-qubit entanglement.
    pub init_fidelity_two_qubit: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self::calibrated()
    }
}

impl DeviceParams {
    /// Calibrated device constants.
    pub fn calibrated() -> Self {
        Self {
            f0_readout: 0.890,
            f1_readout: 0.988,
            post_measurement_fidelity: 0.992,
            t2_star: [12.0, 9.1, 18.2],
            t1_qubit: Some([110.0, 100.0, 330.0]),
            t1_ancilla: Some(300.0),
            p_in: [0.064, 0.091, 0.077],
            prep_code_fidelity: 0.795,
            round_duration: 2.99,
            init_fidelity_two_qubit: 0.910,
        }
    }

    /// Calibrated constants with the input errors estimated for the natural-dephasing run.
    pub fn natural_dephasing() -> Self {
        Self { p_in: [0.049, 0.0804, 0.110], ..Self::calibrated() }
    }

    /// Perfect readout, preparation and no relaxation. `t2_star` keeps the
    /// calibrated values so coherent dephasing stays meaningful.
    pub fn ideal() -> Self {
        Self {
            f0_readout: 1.0,
            f1_readout: 1.0,
            post_measurement_fidelity: 1.0,
            t2_star: [12.0, 9.1, 18.2],
            t1_qubit: None,
            t1_ancilla: None,
            p_in: [0.0; 3],
            prep_code_fidelity: 1.0,
            round_duration: 2.99,
            init_fidelity_two_qubit: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("f0_readout", self.f0_readout)?;
        check_probability("f1_readout", self.f1_readout)?;
        check_probability("post_measurement_fidelity", self.post_measurement_fidelity)?;
        check_probability("prep_code_fidelity", self.prep_code_fidelity)?;
        check_probability("init_fidelity_two_qubit", self.init_fidelity_two_qubit)?;
        for p in self.p_in {
            check_probability("p_in", p)?;
        }
        for t in self.t2_star {
            positive("t2_star", t)?;
        }
        if let Some(t1) = self.t1_qubit {
            for t in t1 {
                positive("t1_qubit", t)?;
            }
        }
        if let Some(t) = self.t1_ancilla {
            positive("t1_ancilla", t)?;
        }
        positive("round_duration", self.round_duration)
    }

    /// Readout fidelity of the given ancilla state.
    pub fn readout_fidelity(&self, ancilla_excited: bool) -> f64 {
        if ancilla_excited {
            self.f1_readout
        } else {
            self.f0_readout
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value: v, range: "(0, inf)" })
    }
}

/// `rho -> (1-p) rho + p Z rho Z`.
pub fn phase_flip_channel(p: f64) -> Result<KrausChannel> {
    check_probability("phase-flip probability", p)?;
    KrausChannel::pauli_mixture(vec![(1.0 - p, vec![Pauli::I]), (p, vec![Pauli::Z])])
}

/// Per-round flip probability `p_n` such that `n` rounds compose to a total of `p_e`:
/// `(1 - 2 p_e) = (1 - 2 p_n)^n`.
pub fn per_round_probability(p_e: f64, n: u32) -> Result<f64> {
    check_range("p_e", p_e, 0.0, 0.5, "[0, 0.5]")?;
    if n == 0 {
        return Err(Error::InvalidArgument("number of rounds must be at least 1".into()));
    }
    Ok(0.5 * (1.0 - (1.0 - 2.0 * p_e).powf(1.0 / n as f64)))
}

/// Quasistatic detunings of the three data qubits, fixed for one trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetuningSample {
    pub delta: [f64; 3],
}

/// Standard deviation of the detuning giving a Gaussian decay with time constant `t2_star`.
pub fn detuning_sigma(t2_star: f64) -> f64 {
    std::f64::consts::SQRT_2 / t2_star
}

pub fn sample_detuning<R: Rng + ?Sized>(params: &DeviceParams, rng: &mut R) -> DetuningSample {
    let delta = params.t2_star.map(|t2| Normal::new(0.0, detuning_sigma(t2)).expect("finite sigma").sample(rng));
    DetuningSample { delta }
}

/// Free precession of the data qubits for time `t` under `sample`.
pub fn coherent_dephase(state: &DensityOperator, sample: &DetuningSample, t: f64) -> Result<DensityOperator> {
    check_time(t)?;
    let offset = data_offset(state)?;
    let rotations: Vec<(usize, f64)> = (0..DATA_QUBITS).map(|k| (offset + k, sample.delta[k] * t)).collect();
    state.rotate_z(&rotations)
}

/// Retention factor `exp(-sqrt(t / T1))` of a qubit's Bloch vector.
pub fn relaxation_survival(t: f64, t1: Option<f64>) -> f64 {
    match t1 {
        Some(t1) => (-(t / t1).sqrt()).exp(),
        None => 1.0,
    }
}

/// Shrinks the Bloch vector of register position `position` by `retention`.
pub fn depolarize(state: &DensityOperator, position: usize, retention: f64) -> Result<DensityOperator> {
    check_probability("retention", retention)?;
    if retention == 1.0 {
        return Ok(state.clone());
    }
    let w = 0.25 * (1.0 - retention);
    let ch = KrausChannel::pauli_mixture(vec![
        (retention + w, vec![Pauli::I]),
        (w, vec![Pauli::X]),
        (w, vec![Pauli::Y]),
        (w, vec![Pauli::Z]),
    ])?;
    state.apply_channel(&ch, &[position])
}

/// Relaxation of data qubit `qubit` (0..3) over `t`.
pub fn longitudinal_relaxation(
    state: &DensityOperator,
    qubit: usize,
    t: f64,
    params: &DeviceParams,
) -> Result<DensityOperator> {
    check_time(t)?;
    if qubit >= DATA_QUBITS {
        return Err(Error::InvalidArgument(format!("data qubit {qubit} out of range")));
    }
    let offset = data_offset(state)?;
    let t1 = params.t1_qubit.map(|v| v[qubit]);
    depolarize(state, offset + qubit, relaxation_survival(t, t1))
}

pub fn ancilla_flip_probability(t: f64, params: &DeviceParams) -> f64 {
    match params.t1_ancilla {
        Some(t1) => 1.0 - (-t / t1).exp(),
        None => 0.0,
    }
}

/// Whether the ancilla flips while waiting for `t`.
pub fn ancilla_relaxation_flip<R: Rng + ?Sized>(t: f64, params: &DeviceParams, rng: &mut R) -> Result<bool> {
    check_time(t)?;
    let p = ancilla_flip_probability(t, params);
    Ok(p > 0.0 && rng.random::<f64>() < p)
}

/// Depolarizing channel inside the code space: the logical Bloch vector is
/// scaled by `retention` while stabilizer expectations are unchanged.
pub fn logical_depolarize(state: &DensityOperator, retention: f64) -> Result<DensityOperator> {
    check_probability("prep_code_fidelity", retention)?;
    if retention == 1.0 {
        return Ok(state.clone());
    }
    let offset = data_offset(state)?;
    let w = 0.25 * (1.0 - retention);
    let pad = |p: PauliString| p.padded_front(offset);
    state.apply_pauli_mixture(&[
        (retention + w, PauliString::identity(state.n_qubits())),
        (w, pad(logical_flip_operator())),
        (w, pad(logical_y(0))),
        (w, pad(logical_z())),
    ])
}

/// Independent phase flips with per-qubit probabilities on the data qubits.
pub fn phase_flips(state: &DensityOperator, probs: [f64; 3]) -> Result<DensityOperator> {
    let offset = data_offset(state)?;
    let mut out = state.clone();
    for (k, p) in probs.into_iter().enumerate() {
        if p > 0.0 {
            out = out.apply_channel(&phase_flip_channel(p)?, &[offset + k])?;
        }
    }
    Ok(out)
}

/// Position of data qubit 0 in a register holding three data qubits last.
pub fn data_offset(state: &DensityOperator) -> Result<usize> {
    state.n_qubits().checked_sub(DATA_QUBITS).ok_or_else(|| {
        Error::DimensionMismatch(format!("register of {} qubits has no three data qubits", state.n_qubits()))
    })
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { name: "duration", value: t, range: "[0, inf)" })
    }
}
