use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::pauli::PauliAction;
use super::{max_abs_diff, CMatrix, KrausChannel, Outcome, Pauli, PauliString, TOLERANCE};

pub const MAX_QUBITS: usize = 4;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Mixed state of an `n`-qubit register, `1 <= n <= 4`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    n: usize,
    rho: CMatrix,
}

/// Result of a projective Pauli measurement.
#[derive(Clone, Debug)]
pub struct ProjectiveOutcome {
    pub outcome: Outcome,
    pub state: DensityOperator,
    pub probability: f64,
}

impl DensityOperator {
    /// Wraps a matrix after checking trace, Hermiticity and positivity.
    pub fn from_matrix(rho: CMatrix) -> Result<Self> {
        let n = qubits_for_dim(rho.nrows())?;
        if rho.ncols() != rho.nrows() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        let state = Self { n, rho };
        state.validate()?;
        Ok(state)
    }

    /// `|psi><psi|` for a normalised amplitude vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let n = qubits_for_dim(amplitudes.len())?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::OutOfRange { name: "state norm", value: norm, range: "1 ± 1e-10" });
        }
        let d = amplitudes.len();
        let rho = DMatrix::from_fn(d, d, |i, j| amplitudes[i] * amplitudes[j].conj());
        Ok(Self { n, rho })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let d = dim_for_qubits(n)?;
        if index >= d {
            return Err(Error::DimensionMismatch(format!("basis index {index} out of range for {n} qubits")));
        }
        let mut rho = DMatrix::zeros(d, d);
        rho[(index, index)] = Complex64::new(1.0, 0.0);
        Ok(Self { n, rho })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let d = dim_for_qubits(n)?;
        Ok(Self { n, rho: DMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0) })
    }

    /// `self ⊗ other`, with `self` on the more significant positions.
    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        let n = self.n + other.n;
        dim_for_qubits(n)?;
        Ok(Self { n, rho: self.rho.kronecker(&other.rho) })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Checks trace, Hermiticity (1e-12) and positivity (-1e-10).
    pub fn validate(&self) -> Result<()> {
        let tr = self.rho.trace();
        if (tr.re - 1.0).abs() > TOLERANCE || tr.im.abs() > TOLERANCE {
            return Err(Error::OutOfRange { name: "trace", value: tr.re, range: "1 ± 1e-12" });
        }
        let herm = max_abs_diff(&self.rho, &self.rho.adjoint());
        if herm > TOLERANCE {
            return Err(Error::OutOfRange { name: "hermiticity deviation", value: herm, range: "<= 1e-12" });
        }
        let min = self.min_eigenvalue();
        if min < -1e-10 {
            return Err(Error::OutOfRange { name: "minimum eigenvalue", value: min, range: ">= -1e-10" });
        }
        Ok(())
    }

    fn checked(self) -> Self {
        debug_assert!((self.trace() - 1.0).abs() < 1e-9, "trace drifted to {}", self.trace());
        debug_assert!(max_abs_diff(&self.rho, &self.rho.adjoint()) < 1e-9, "lost hermiticity");
        self
    }

    /// `U rho U†` with `u` acting on `targets` (first target is the most
    /// significant factor of `u`).
    pub fn apply_unitary(&self, u: &CMatrix, targets: &[usize]) -> Result<Self> {
        self.check_targets(targets, u.nrows())?;
        let k = u.nrows();
        let dev = max_abs_diff(&(u.adjoint() * u), &DMatrix::identity(k, k));
        if dev > TOLERANCE {
            return Err(Error::NotUnitary(dev));
        }
        let full = self.embed(u, targets);
        Ok(Self { n: self.n, rho: &full * &self.rho * full.adjoint() }.checked())
    }

    /// `sum_k K_k rho K_k†` on `targets`.
    pub fn apply_channel(&self, channel: &KrausChannel, targets: &[usize]) -> Result<Self> {
        self.check_targets(targets, 1 << channel.arity())?;
        if let Some(terms) = channel.pauli_terms() {
            let strings: Vec<(f64, PauliString)> =
                terms.iter().map(|(w, letters)| (*w, self.place(letters, targets))).collect();
            return self.apply_pauli_mixture(&strings);
        }
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for k in channel.kraus_ops() {
            let full = self.embed(k, targets);
            out += &full * &self.rho * full.adjoint();
        }
        Ok(Self { n: self.n, rho: out }.checked())
    }

    /// `P rho P†` for a full-register Pauli string.
    pub fn conjugate_pauli(&self, p: &PauliString) -> Result<Self> {
        self.check_len(p)?;
        Ok(Self { n: self.n, rho: self.conj_by(&p.action()) })
    }

    /// `sum_k w_k P_k rho P_k` for full-register Pauli strings.
    pub fn apply_pauli_mixture(&self, terms: &[(f64, PauliString)]) -> Result<Self> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for (w, p) in terms {
            self.check_len(p)?;
            if *w == 0.0 {
                continue;
            }
            out += self.conj_by(&p.action()) * Complex64::new(*w, 0.0);
        }
        Ok(Self { n: self.n, rho: out }.checked())
    }

    /// Applies `exp(-i angle Z / 2)` on each listed position. Diagonal, so cheap.
    pub fn rotate_z(&self, rotations: &[(usize, f64)]) -> Result<Self> {
        for &(q, _) in rotations {
            if q >= self.n {
                return Err(Error::DimensionMismatch(format!("position {q} out of range for {} qubits", self.n)));
            }
        }
        let d = self.dim();
        let phases: Vec<Complex64> = (0..d)
            .map(|b| {
                let psi: f64 = rotations
                    .iter()
                    .map(|&(q, angle)| if b & self.bit(q) != 0 { 0.5 * angle } else { -0.5 * angle })
                    .sum();
                Complex64::from_polar(1.0, psi)
            })
            .collect();
        let rho = DMatrix::from_fn(d, d, |i, j| phases[i] * self.rho[(i, j)] * phases[j].conj());
        Ok(Self { n: self.n, rho })
    }

    /// `Tr(rho P)`.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        self.check_len(p)?;
        Ok(self.expectation_unchecked(&p.action()))
    }

    fn expectation_unchecked(&self, act: &PauliAction) -> f64 {
        // P_{(i^m), i} = phase(i)  =>  Tr(rho P) = sum_i rho_{i, i^m} phase(i)
        (0..self.dim()).map(|i| self.rho[(i, i ^ act.flip)] * act.phase(i)).sum::<Complex64>().re
    }

    /// Projects onto the `outcome` eigenspace of `p`; returns the renormalised
    /// post-state and the Born probability.
    pub fn project(&self, p: &PauliString, outcome: Outcome) -> Result<(Self, f64)> {
        self.check_len(p)?;
        if p.is_identity() {
            return Err(Error::InvalidArgument("cannot measure an identity observable".into()));
        }
        let act = p.action();
        let s = outcome.value();
        let prob = 0.5 * (1.0 + s * self.expectation_unchecked(&act));
        if prob <= 1e-15 {
            return Err(Error::ZeroProbabilityBranch);
        }
        // Π rho Π = (rho ± P rho ± rho P + P rho P) / 4
        let d = self.dim();
        let pr = self.conj_by(&act);
        let factor = Complex64::new(0.25 / prob, 0.0);
        let rho = DMatrix::from_fn(d, d, |i, j| {
            let p_rho = act.phase(i ^ act.flip) * self.rho[(i ^ act.flip, j)];
            let rho_p = self.rho[(i, j ^ act.flip)] * act.phase(j);
            (self.rho[(i, j)] + (p_rho + rho_p) * s + pr[(i, j)]) * factor
        });
        Ok((Self { n: self.n, rho }.checked(), prob))
    }

    /// Measures `p`, choosing `+1` when `draw < P(+1)`. `draw` must lie in `[0, 1)`.
    pub fn measure_projective(&self, p: &PauliString, draw: f64) -> Result<ProjectiveOutcome> {
        if !(0.0..1.0).contains(&draw) {
            return Err(Error::OutOfRange { name: "draw", value: draw, range: "[0, 1)" });
        }
        self.check_len(p)?;
        if p.is_identity() {
            return Err(Error::InvalidArgument("cannot measure an identity observable".into()));
        }
        let p_plus = 0.5 * (1.0 + self.expectation_unchecked(&p.action()));
        let outcome = if draw < p_plus { Outcome::Plus } else { Outcome::Minus };
        let (state, probability) = self.project(p, outcome)?;
        Ok(ProjectiveOutcome { outcome, state, probability })
    }

    /// Reduced state on `keep` (ascending positions).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() || keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&q| q >= self.n) {
            return Err(Error::InvalidArgument(format!("invalid kept positions {keep:?}")));
        }
        let kept_mask: usize = keep.iter().map(|&q| self.bit(q)).sum();
        let traced_mask = (self.dim() - 1) & !kept_mask;
        let m = keep.len();
        let dk = 1 << m;
        let sub = |b: usize| -> usize {
            keep.iter()
                .enumerate()
                .fold(0, |acc, (k, &q)| if b & self.bit(q) != 0 { acc | 1 << (m - 1 - k) } else { acc })
        };
        let mut out = DMatrix::zeros(dk, dk);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if i & traced_mask == j & traced_mask {
                    out[(sub(i), sub(j))] += self.rho[(i, j)];
                }
            }
        }
        Ok(Self { n: m, rho: out })
    }

    /// Probability that position `q` reads `1` in the computational basis.
    pub fn excited_population(&self, q: usize) -> f64 {
        let bit = self.bit(q);
        (0..self.dim()).filter(|b| b & bit != 0).map(|b| self.rho[(b, b)].re).sum()
    }

    /// Convex combination `sum_k w_k rho_k` of same-size states.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let d = first.1.dim();
        let mut rho = DMatrix::zeros(d, d);
        for (w, s) in parts {
            if s.dim() != d {
                return Err(Error::DimensionMismatch("mixture components differ in size".into()));
            }
            rho += &s.rho * Complex64::new(*w, 0.0);
        }
        Ok(Self { n: first.1.n, rho })
    }

    /// Fidelity `<psi| rho |psi>` with a pure state.
    pub fn fidelity_with_pure(&self, amplitudes: &[Complex64]) -> Result<f64> {
        if amplitudes.len() != self.dim() {
            return Err(Error::DimensionMismatch("amplitude vector size".into()));
        }
        let mut acc = ZERO;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += amplitudes[i].conj() * self.rho[(i, j)] * amplitudes[j];
            }
        }
        Ok(acc.re)
    }

    fn conj_by(&self, act: &PauliAction) -> CMatrix {
        // (P rho P†)_{ij} = phase(i^m) rho_{i^m, j^m} conj(phase(j^m))
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| {
            let a = i ^ act.flip;
            let b = j ^ act.flip;
            act.phase(a) * self.rho[(a, b)] * act.phase(b).conj()
        })
    }

    #[inline]
    fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn place(&self, letters: &[Pauli], targets: &[usize]) -> PauliString {
        let mut full = vec![Pauli::I; self.n];
        for (&t, &p) in targets.iter().zip(letters) {
            full[t] = p;
        }
        PauliString::new(full)
    }

    fn check_len(&self, p: &PauliString) -> Result<()> {
        if p.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "Pauli string of length {} on a {}-qubit state",
                p.len(),
                self.n
            )));
        }
        Ok(())
    }

    fn check_targets(&self, targets: &[usize], op_dim: usize) -> Result<()> {
        if op_dim != 1 << targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {op_dim} on {} targets",
                targets.len()
            )));
        }
        for (k, &t) in targets.iter().enumerate() {
            if t >= self.n || targets[..k].contains(&t) {
                return Err(Error::DimensionMismatch(format!("invalid target list {targets:?}")));
            }
        }
        Ok(())
    }

    fn embed(&self, op: &CMatrix, targets: &[usize]) -> CMatrix {
        let d = self.dim();
        let m = targets.len();
        let tmask: usize = targets.iter().map(|&q| self.bit(q)).sum();
        let sub = |b: usize| -> usize {
            targets
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &q)| if b & self.bit(q) != 0 { acc | 1 << (m - 1 - k) } else { acc })
        };
        DMatrix::from_fn(d, d, |i, j| if i & !tmask == j & !tmask { op[(sub(i), sub(j))] } else { ZERO })
    }
}

fn dim_for_qubits(n: usize) -> Result<usize> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(1 << n)
    } else {
        Err(Error::DimensionMismatch(format!("{n} qubits outside 1..={MAX_QUBITS}")))
    }
}

fn qubits_for_dim(d: usize) -> Result<usize> {
    if d.is_power_of_two() {
        let n = d.trailing_zeros() as usize;
        dim_for_qubits(n).map(|_| n)
    } else {
        Err(Error::DimensionMismatch(format!("dimension {d} is not a power of two")))
    }
}
