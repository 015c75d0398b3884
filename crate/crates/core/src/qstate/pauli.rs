use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::CMatrix;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let v = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
        };
        DMatrix::from_row_slice(2, 2, &v)
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn phases(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Eigenvalue of a Pauli observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    pub fn is_plus(self) -> bool {
        self == Outcome::Plus
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+1",
            Outcome::Minus => "-1",
        })
    }
}

/// A signed tensor product of Pauli letters, one per register position.
///
/// Position 0 is the most significant tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    negative: bool,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters, negative: false }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![Pauli::I; n])
    }

    /// `letter` at `position`, identity elsewhere.
    pub fn single(n: usize, position: usize, letter: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[position] = letter;
        Self::new(letters)
    }

    pub fn negated(mut self) -> Self {
        self.negative = !self.negative;
        self
    }

    /// The same string on a register with `count` extra identity positions
    /// prepended (e.g. to make room for an ancilla at position 0).
    pub fn padded_front(&self, count: usize) -> Self {
        let mut letters = vec![Pauli::I; count];
        letters.extend_from_slice(&self.letters);
        Self { letters, negative: self.negative }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Whether the two strings commute (signs ignored).
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Dense matrix of the full operator, sign included.
    pub fn matrix(&self) -> CMatrix {
        let mut m = DMatrix::from_element(1, 1, Complex64::new(self.sign(), 0.0));
        for p in &self.letters {
            m = m.kronecker(&p.matrix());
        }
        m
    }

    /// Compact action on computational basis states: `P|b> = phase(b) |b ^ flip_mask>`.
    pub(crate) fn action(&self) -> PauliAction {
        let n = self.letters.len();
        let mut flip = 0usize;
        let mut zmask = 0usize;
        let mut ny = 0u32;
        for (pos, &p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - pos);
            if p.flips() {
                flip |= bit;
            }
            if p.phases() {
                zmask |= bit;
            }
            if p == Pauli::Y {
                ny += 1;
            }
        }
        let i_pow = match ny % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        PauliAction { flip, zmask, base: i_pow * self.sign() }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        for p in &self.letters {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let letters = body
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' | '_' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!("unknown Pauli letter `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::InvalidArgument("empty Pauli string".into()));
        }
        Ok(Self { letters, negative })
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PauliAction {
    pub flip: usize,
    zmask: usize,
    base: Complex64,
}

impl PauliAction {
    #[inline]
    pub fn phase(&self, b: usize) -> Complex64 {
        if (b & self.zmask).count_ones() % 2 == 1 {
            -self.base
        } else {
            self.base
        }
    }
}
