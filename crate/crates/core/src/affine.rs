//! Affine functionals `a0 + a1 x1 + ... + ak xk` and side signs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// Position relative to a hyperplane: below, on, or above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(r: &Rational) -> Sign {
        match r.signum() {
            -1 => Sign::Neg,
            0 => Sign::Zero,
            _ => Sign::Pos,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '=',
            Sign::Pos => '+',
        }
    }

    pub fn from_char(c: char) -> Option<Sign> {
        match c {
            '-' => Some(Sign::Neg),
            '=' => Some(Sign::Zero),
            '+' => Some(Sign::Pos),
            _ => None,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Pos,
            _ => Sign::Neg,
        }
    }
}

pub fn signs_to_string(signs: &[Sign]) -> String {
    signs.iter().map(|s| s.as_char()).collect()
}

pub fn signs_from_str(s: &str) -> Option<Vec<Sign>> {
    s.chars().map(Sign::from_char).collect()
}

/// Coefficients `[a0, a1, ..., ak]` of an affine map on `R^k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AffineFunctional {
    coeffs: Vec<Rational>,
}

impl AffineFunctional {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "an affine functional needs a constant term"
        );
        AffineFunctional { coeffs }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        let mut coeffs = vec![Rational::zero(); dim + 1];
        coeffs[0] = c;
        AffineFunctional { coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(dim, Rational::zero())
    }

    /// The coordinate function `x ↦ x_i` (0-based `i`).
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut f = Self::zero(dim);
        f.coeffs[i + 1] = Rational::one();
        f
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn constant_term(&self) -> &Rational {
        &self.coeffs[0]
    }

    /// Coefficient of variable `i` (0-based).
    pub fn coeff(&self, i: usize) -> &Rational {
        &self.coeffs[i + 1]
    }

    pub fn linear(&self) -> &[Rational] {
        &self.coeffs[1..]
    }

    pub fn is_constant(&self) -> bool {
        self.linear().iter().all(Rational::is_zero)
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        debug_assert_eq!(x.len(), self.dim());
        let mut acc = self.coeffs[0].clone();
        for (a, v) in self.coeffs[1..].iter().zip(x) {
            if !a.is_zero() {
                acc += a * v;
            }
        }
        acc
    }

    /// Evaluate on the first `x.len()` coordinates; remaining coefficients must be zero.
    pub fn eval_prefix(&self, x: &[Rational]) -> Rational {
        let mut acc = self.coeffs[0].clone();
        for (a, v) in self.coeffs[1..].iter().zip(x) {
            if !a.is_zero() {
                acc += a * v;
            }
        }
        acc
    }

    pub fn scale(&self, w: &Rational) -> Self {
        AffineFunctional {
            coeffs: self.coeffs.iter().map(|c| c * w).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        AffineFunctional {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        AffineFunctional {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        AffineFunctional {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn add_constant(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// Substitute values for the coordinates marked `Some`, keeping the others
    /// in their original order.
    pub fn substitute(&self, fixed: &[Option<Rational>]) -> Self {
        assert_eq!(fixed.len(), self.dim());
        let mut coeffs = vec![self.coeffs[0].clone()];
        for (a, f) in self.coeffs[1..].iter().zip(fixed) {
            match f {
                Some(v) => coeffs[0] += a * v,
                None => coeffs.push(a.clone()),
            }
        }
        AffineFunctional { coeffs }
    }

    /// Rename variable `i` to `targets[i]` in a space of dimension `dim`.
    pub fn embed(&self, dim: usize, targets: &[usize]) -> Self {
        assert_eq!(targets.len(), self.dim());
        let mut out = Self::constant(dim, self.coeffs[0].clone());
        for (a, t) in self.coeffs[1..].iter().zip(targets) {
            out.coeffs[t + 1] += a;
        }
        out
    }

    /// True when `self = λ·other` for some rational `λ` (including `λ = 0`).
    pub fn is_multiple_of(&self, other: &Self) -> bool {
        let Some(pivot) = other.coeffs.iter().position(|c| !c.is_zero()) else {
            return self.coeffs.iter().all(Rational::is_zero);
        };
        let lambda = &self.coeffs[pivot] / &other.coeffs[pivot];
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .all(|(a, b)| *a == &lambda * b)
    }
}

impl fmt::Debug for AffineFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for AffineFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeffs[0])?;
        for (i, a) in self.coeffs[1..].iter().enumerate() {
            if !a.is_zero() {
                write!(f, " + {a}*x{}", i + 1)?;
            }
        }
        Ok(())
    }
}
