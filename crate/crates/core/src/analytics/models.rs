use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::syndromes::{detected_syndrome_probabilities, syndrome_probabilities};
use crate::error::{check_range, Error, Result};
use crate::measurement::{effective_measurement_fidelity, symmetrized_measurement_fidelity, AssignmentConvention};
use crate::noise::{per_round_probability, DeviceParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    /// `O + A (1 - 3p^2 + 2p^3)`
    FQec,
    /// `O + A (1 - p)`
    FLinear,
    /// `w F_QEC + (1 - w) F_linear`
    Weighted,
    /// Mean `|±X>_L` fidelity after `n_rounds` rounds.
    MultiRoundState,
    /// `(1 + A exp(-(t/T)^n_exp)) / 2`
    Decay,
    /// Syndrome category probability before readout.
    SyndromeIdeal,
    /// Syndrome category probability after readout.
    SyndromeDetected,
}

impl ModelId {
    pub const ALL: [ModelId; 7] = [
        Self::FQec,
        Self::FLinear,
        Self::Weighted,
        Self::MultiRoundState,
        Self::Decay,
        Self::SyndromeIdeal,
        Self::SyndromeDetected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::FQec => "f_qec",
            Self::FLinear => "f_linear",
            Self::Weighted => "weighted",
            Self::MultiRoundState => "multi_round_state",
            Self::Decay => "decay",
            Self::SyndromeIdeal => "syndrome_ideal",
            Self::SyndromeDetected => "syndrome_detected",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// A model with named parameters.
///
/// Parameter names: `w`, `A`, `A_prime`, `O`, `n_rounds`, `T`, `n_exp`,
/// `p_in1..3`, `F0`, `F1`, `convention` and `category`. The amplitude of
/// the fidelity models is `A` when given, otherwise `A_prime * F_M(p_e)`
/// (raised to `n_rounds - 1` for the multi-round model). `convention` is
/// written as its two bits (`0`, `1`, `10`, `11`) or `-1` for the average
/// over all four.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveModel {
    pub model: ModelId,
    pub params: BTreeMap<String, f64>,
}

impl CurveModel {
    pub fn new(model: ModelId) -> Self {
        Self { model, params: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        let name = if name == "A'" { "A_prime" } else { name };
        self.params.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.params.get(name).copied().ok_or_else(|| Error::MissingParameter(format!("{name} (model {})", self.model)))
    }

    fn get_or(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    fn readout(&self) -> DeviceParams {
        let base = DeviceParams::calibrated();
        DeviceParams {
            f0_readout: self.get_or("F0", base.f0_readout),
            f1_readout: self.get_or("F1", base.f1_readout),
            ..base
        }
    }

    fn convention(&self) -> Result<Option<AssignmentConvention>> {
        let code = self.get_or("convention", 11.0);
        if code == -1.0 {
            return Ok(None);
        }
        AssignmentConvention::ALL
            .into_iter()
            .find(|c| convention_code(*c) == code)
            .map(Some)
            .ok_or_else(|| Error::InvalidArgument(format!("convention code {code} is not one of 0, 1, 10, 11, -1")))
    }

    fn measurement_fidelity(&self, p_e: f64) -> Result<f64> {
        let params = self.readout();
        match self.convention()? {
            Some(c) => effective_measurement_fidelity(p_e, c, &params),
            None => symmetrized_measurement_fidelity(p_e, &params),
        }
    }

    /// `A`, or `A' F_M(p_e)^power`.
    fn amplitude(&self, p_e: f64, power: i32) -> Result<f64> {
        if let Some(a) = self.params.get("A") {
            return Ok(*a);
        }
        let a_prime =
            self.get("A_prime").map_err(|_| Error::MissingParameter(format!("A or A_prime (model {})", self.model)))?;
        Ok(a_prime * self.measurement_fidelity(p_e)?.powi(power))
    }

    fn p_in(&self) -> Result<[f64; 3]> {
        Ok([self.get("p_in1")?, self.get("p_in2")?, self.get("p_in3")?])
    }

    fn category(&self) -> Result<usize> {
        let c = self.get("category")?;
        if c.fract() != 0.0 || !(0.0..=3.0).contains(&c) {
            return Err(Error::InvalidArgument(format!("category must be 0..=3, got {c}")));
        }
        Ok(c as usize)
    }
}

/// Two-bit code of a convention, e.g. `11` for `{1,1}`.
pub fn convention_code(c: AssignmentConvention) -> f64 {
    10.0 * c.plus[0].bit() as u8 as f64 + c.plus[1].bit() as u8 as f64
}

fn qec_shape(p: f64) -> f64 {
    1.0 - 3.0 * p * p + 2.0 * p.powi(3)
}

pub fn evaluate_model(model: &CurveModel, x: f64) -> Result<f64> {
    let m = model;
    match m.model {
        ModelId::Decay => {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::OutOfRange { name: "t", value: x, range: "[0, inf)" });
            }
            let (a, t, n) = (m.get("A")?, m.get("T")?, m.get("n_exp")?);
            Ok(0.5 * (1.0 + a * (-(x / t).powf(n)).exp()))
        }
        ModelId::FQec => {
            check_range("p_e", x, 0.0, 1.0, "[0, 1]")?;
            Ok(m.get("O")? + m.amplitude(x, 1)? * qec_shape(x))
        }
        ModelId::FLinear => {
            check_range("p_e", x, 0.0, 1.0, "[0, 1]")?;
            Ok(m.get("O")? + m.amplitude(x, 1)? * (1.0 - x))
        }
        ModelId::Weighted => {
            check_range("p_e", x, 0.0, 1.0, "[0, 1]")?;
            let (w, o, a) = (m.get("w")?, m.get("O")?, m.amplitude(x, 1)?);
            Ok(o + a * (w * qec_shape(x) + (1.0 - w) * (1.0 - x)))
        }
        ModelId::MultiRoundState => {
            let n = m.get("n_rounds")?;
            if n.fract() != 0.0 || n < 1.0 {
                return Err(Error::InvalidArgument(format!("n_rounds must be a positive integer, got {n}")));
            }
            let n = n as u32;
            let p_n = per_round_probability(x, n)?;
            let w = m.get("w")?;
            let a = m.amplitude(x, n as i32 - 1)?;
            let corrected = (1.0 - 6.0 * p_n * p_n + 4.0 * p_n.powi(3)).powi(n as i32);
            Ok(0.5 * w * (1.0 + a * corrected) + 0.5 * (1.0 - w) * (1.0 + a * (1.0 - 2.0 * x)))
        }
        ModelId::SyndromeIdeal => Ok(syndrome_probabilities(m.p_in()?, x)?[m.category()?]),
        ModelId::SyndromeDetected => {
            let ideal = syndrome_probabilities(m.p_in()?, x)?;
            let params = m.readout();
            let detected = match m.convention()? {
                Some(c) => detected_syndrome_probabilities(ideal, c, params.f0_readout, params.f1_readout)?,
                None => {
                    let mut acc = [0.0; 4];
                    for c in AssignmentConvention::ALL {
                        let d = detected_syndrome_probabilities(ideal, c, params.f0_readout, params.f1_readout)?;
                        for k in 0..4 {
                            acc[k] += 0.25 * d[k];
                        }
                    }
                    acc
                }
            };
            Ok(detected[m.category()?])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_fit_values() {
        let f = CurveModel::new(ModelId::FQec).with("O", 0.086).with("A", 0.557);
        assert!((evaluate_model(&f, 0.0).unwrap() - 0.643).abs() < 1e-12);
        let w = CurveModel::new(ModelId::Weighted).with("O", 0.086).with("A", 0.557).with("w", 1.0);
        assert!((evaluate_model(&w, 0.5).unwrap() - (0.086 + 0.557 / 2.0)).abs() < 1e-12);
        let e = (-1.0f64).exp();
        for (t, n) in [(17.3, 2.09), (13.7, 2.37)] {
            let d = CurveModel::new(ModelId::Decay).with("A", 1.0).with("T", t).with("n_exp", n);
            assert!((evaluate_model(&d, t).unwrap() - 0.5 * (1.0 + e)).abs() < 1e-12);
        }
        let lin = CurveModel::new(ModelId::FLinear).with("O", 0.0).with("A", 1.0);
        assert!((evaluate_model(&lin, 0.3).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn amplitude_from_measurement_fidelity() {
        let m = CurveModel::new(ModelId::FQec).with("O", 0.0).with("A_prime", 1.0);
        assert!((evaluate_model(&m, 0.0).unwrap() - 0.988f64.powi(2)).abs() < 1e-12);
        let sym = m.clone().with("convention", -1.0);
        assert!((evaluate_model(&sym, 0.0).unwrap() - 0.939f64.powi(2)).abs() < 1e-12);
        let one = CurveModel::new(ModelId::MultiRoundState).with("w", 1.0).with("A_prime", 0.8).with("n_rounds", 1.0);
        // F_M^0: the amplitude is A' itself for a single round.
        assert!((evaluate_model(&one, 0.0).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn missing_and_unknown() {
        assert!(matches!(
            evaluate_model(&CurveModel::new(ModelId::FQec).with("O", 0.1), 0.1),
            Err(Error::MissingParameter(_))
        ));
        assert!(matches!("nope".parse::<ModelId>(), Err(Error::UnknownModel(_))));
        for m in ModelId::ALL {
            assert_eq!(m.name().parse::<ModelId>().unwrap(), m);
        }
    }
}
