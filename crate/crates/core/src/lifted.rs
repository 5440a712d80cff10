//! Rationals extended with an undefined element `⊥`.
//!
//! `⊥` absorbs every arithmetic operation and division by zero yields `⊥`.
//! For comparisons `⊥` is placed below every rational and equal only to itself,
//! which makes the order total.

use std::cmp::Ordering;
use std::fmt;

use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum LiftedRational {
    Bottom,
    Value(Rational),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftedOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl LiftedRational {
    pub fn value(r: impl Into<Rational>) -> Self {
        LiftedRational::Value(r.into())
    }

    pub fn zero() -> Self {
        LiftedRational::Value(Rational::zero())
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, LiftedRational::Bottom)
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            LiftedRational::Bottom => None,
            LiftedRational::Value(r) => Some(r),
        }
    }

    pub fn into_rational(self) -> Option<Rational> {
        match self {
            LiftedRational::Bottom => None,
            LiftedRational::Value(r) => Some(r),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        lifted_arith(LiftedOp::Add, self, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        lifted_arith(LiftedOp::Sub, self, other)
    }

    pub fn mul(&self, other: &Self) -> Self {
        lifted_arith(LiftedOp::Mul, self, other)
    }

    pub fn div(&self, other: &Self) -> Self {
        lifted_arith(LiftedOp::Div, self, other)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        match self {
            LiftedRational::Bottom => LiftedRational::Bottom,
            LiftedRational::Value(r) => LiftedRational::Value(q * r),
        }
    }
}

impl From<Rational> for LiftedRational {
    fn from(r: Rational) -> Self {
        LiftedRational::Value(r)
    }
}

impl From<Option<Rational>> for LiftedRational {
    fn from(r: Option<Rational>) -> Self {
        r.map_or(LiftedRational::Bottom, LiftedRational::Value)
    }
}

/// Binary arithmetic with `⊥` absorption; `x / 0 = ⊥`.
pub fn lifted_arith(op: LiftedOp, a: &LiftedRational, b: &LiftedRational) -> LiftedRational {
    let (LiftedRational::Value(x), LiftedRational::Value(y)) = (a, b) else {
        return LiftedRational::Bottom;
    };
    match op {
        LiftedOp::Add => LiftedRational::Value(x + y),
        LiftedOp::Sub => LiftedRational::Value(x - y),
        LiftedOp::Mul => LiftedRational::Value(x * y),
        LiftedOp::Div => x.checked_div(y).into(),
    }
}

/// Total order with `⊥` as the least element.
pub fn lifted_compare(a: &LiftedRational, b: &LiftedRational) -> Ordering {
    match (a, b) {
        (LiftedRational::Bottom, LiftedRational::Bottom) => Ordering::Equal,
        (LiftedRational::Bottom, _) => Ordering::Less,
        (_, LiftedRational::Bottom) => Ordering::Greater,
        (LiftedRational::Value(x), LiftedRational::Value(y)) => x.cmp(y),
    }
}

impl Ord for LiftedRational {
    fn cmp(&self, other: &Self) -> Ordering {
        lifted_compare(self, other)
    }
}

impl PartialOrd for LiftedRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LiftedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiftedRational::Bottom => write!(f, "bot"),
            LiftedRational::Value(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Debug for LiftedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: i64) -> LiftedRational {
        LiftedRational::value(n)
    }

    #[test]
    fn bottom_absorbs() {
        let bot = LiftedRational::Bottom;
        for op in [LiftedOp::Add, LiftedOp::Sub, LiftedOp::Mul, LiftedOp::Div] {
            assert!(lifted_arith(op, &v(3), &bot).is_bottom());
            assert!(lifted_arith(op, &bot, &v(3)).is_bottom());
            assert!(lifted_arith(op, &bot, &bot).is_bottom());
        }
        assert!(bot.scale(&Rational::zero()).is_bottom());
        assert!(v(1).div(&v(0)).is_bottom());
        assert_eq!(v(1).div(&v(4)), LiftedRational::Value(Rational::new(1, 4)));
    }

    #[test]
    fn bottom_is_least() {
        let bot = LiftedRational::Bottom;
        assert_eq!(lifted_compare(&bot, &v(-100)), Ordering::Less);
        assert_eq!(lifted_compare(&v(-100), &bot), Ordering::Greater);
        assert_eq!(lifted_compare(&bot, &bot), Ordering::Equal);
    }
}
