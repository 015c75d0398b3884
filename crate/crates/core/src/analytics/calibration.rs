use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Readings from the multi-qubit preparation experiment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MultiQubitReadout {
    /// Single-qubit marginals `<Z_i>` in the multi-qubit run; when absent the
    /// single-qubit calibration values are reused.
    pub marginals: Option<[f64; 3]>,
    /// `(qubits, <Z...Z>)` for pair and triple correlators; qubits are `0..3`.
    pub correlators: Vec<(Vec<usize>, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutCalibration {
    /// Per-qubit readout contrast `C_Qi`.
    pub qubit: [f64; 3],
    /// Per-qubit initialization contrast `C_init,Qi`.
    pub init: [f64; 3],
    /// Residual multi-qubit readout contrast for each correlator set.
    pub multi: Vec<(Vec<usize>, f64)>,
}

const BAND: (f64, f64) = (0.0, 1.2);

fn in_band(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > BAND.0 && v <= BAND.1 {
        Ok(v)
    } else {
        Err(Error::Infeasible(format!("{name} = {v} is outside ({}, {}]", BAND.0, BAND.1)))
    }
}

fn check_set(set: &[usize]) -> Result<()> {
    let mut seen = [false; 3];
    for &q in set {
        if q >= 3 || std::mem::replace(&mut seen[q], true) {
            return Err(Error::InvalidArgument(format!("bad qubit set {set:?}")));
        }
    }
    if set.len() < 2 {
        return Err(Error::InvalidArgument(format!("correlator set {set:?} needs at least two qubits")));
    }
    Ok(())
}

/// Separates readout and initialization contrasts, given the
/// normalization `f_n` of the ground state.
///
/// `<Z_i> = F_N C_Qi²` in the single-qubit run; `<Z_i> = F_N C_init,i C_Qi`
/// in the multi-qubit run; a correlator over set `S` is
/// `F_N Π_S C_init,i · C_S`.
pub fn calibrate_readout(single_qubit_z: [f64; 3], multi: &MultiQubitReadout, f_n: f64) -> Result<ReadoutCalibration> {
    if !(f_n > 0.0 && f_n <= 1.0) {
        return Err(Error::OutOfRange { name: "F_N", value: f_n, range: "(0, 1]" });
    }
    let mut qubit = [0.0; 3];
    for i in 0..3 {
        if single_qubit_z[i] <= 0.0 {
            return Err(Error::Infeasible(format!("<Z_{}> = {} must be positive", i + 1, single_qubit_z[i])));
        }
        qubit[i] = in_band("C_Q", (single_qubit_z[i] / f_n).sqrt())?;
    }
    let marginals = multi.marginals.unwrap_or(single_qubit_z);
    let mut init = [0.0; 3];
    for i in 0..3 {
        init[i] = in_band("C_init", marginals[i] / (f_n * qubit[i]))?;
    }
    let mut out = Vec::with_capacity(multi.correlators.len());
    for (set, z) in &multi.correlators {
        check_set(set)?;
        let denom: f64 = f_n * set.iter().map(|&q| init[q]).product::<f64>();
        out.push((set.clone(), in_band("C_multi", z / denom)?));
    }
    Ok(ReadoutCalibration { qubit, init, multi: out })
}

/// Expectation values implied by a calibration: the inverse of
/// [`calibrate_readout`].
pub fn forward_readout(cal: &ReadoutCalibration, f_n: f64) -> Result<([f64; 3], MultiQubitReadout)> {
    let single = cal.qubit.map(|c| f_n * c * c);
    let marginals = std::array::from_fn(|i| f_n * cal.init[i] * cal.qubit[i]);
    let mut correlators = Vec::with_capacity(cal.multi.len());
    for (set, c) in &cal.multi {
        check_set(set)?;
        correlators.push((set.clone(), f_n * set.iter().map(|&q| cal.init[q]).product::<f64>() * c));
    }
    Ok((single, MultiQubitReadout { marginals: Some(marginals), correlators }))
}
