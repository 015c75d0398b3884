use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{max_abs_diff, CMatrix, Pauli, PauliString, TOLERANCE};

/// A completely positive trace-preserving map given by its Kraus operators.
///
/// Channels built from Pauli mixtures remember that decomposition so they
/// can be applied without dense matrix products.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
    pauli_terms: Option<Vec<(f64, Vec<Pauli>)>>,
    arity: usize,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first =
            ops.first().ok_or_else(|| Error::InvalidArgument("channel needs at least one Kraus operator".into()))?;
        let dim = first.nrows();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!("Kraus dimension {dim} is not a power of two")));
        }
        if ops.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
        }
        let mut sum = DMatrix::zeros(dim, dim);
        for k in &ops {
            sum += k.adjoint() * k;
        }
        let dev = max_abs_diff(&sum, &DMatrix::identity(dim, dim));
        if dev > TOLERANCE {
            return Err(Error::IncompleteChannel(dev));
        }
        Ok(Self { ops, pauli_terms: None, arity: dim.trailing_zeros() as usize })
    }

    /// `rho -> sum_k w_k P_k rho P_k` with non-negative weights summing to one.
    pub fn pauli_mixture(terms: Vec<(f64, Vec<Pauli>)>) -> Result<Self> {
        let arity = terms.first().map(|t| t.1.len()).unwrap_or(0);
        if arity == 0 || terms.iter().any(|t| t.1.len() != arity) {
            return Err(Error::DimensionMismatch("Pauli terms must share a non-zero length".into()));
        }
        if terms.iter().any(|t| t.0.is_nan() || t.0 < 0.0) {
            return Err(Error::InvalidArgument("Pauli channel weights must be non-negative".into()));
        }
        let total: f64 = terms.iter().map(|t| t.0).sum();
        if (total - 1.0).abs() > TOLERANCE {
            return Err(Error::IncompleteChannel((total - 1.0).abs()));
        }
        let ops = terms
            .iter()
            .map(|(w, letters)| PauliString::new(letters.clone()).matrix() * Complex64::new(w.sqrt(), 0.0))
            .collect();
        Ok(Self { ops, pauli_terms: Some(terms), arity })
    }

    pub fn identity(arity: usize) -> Self {
        Self::pauli_mixture(vec![(1.0, vec![Pauli::I; arity])]).expect("identity channel")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub(crate) fn pauli_terms(&self) -> Option<&[(f64, Vec<Pauli>)]> {
        self.pauli_terms.as_deref()
    }
}
