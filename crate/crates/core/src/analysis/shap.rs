//! Exact Shapley values under the uniform distribution on a box.

use std::collections::HashMap;

use super::{integrate_box, AnalysisError, InputBox};
use crate::pwl::{pwl_eval, pwl_restrict, PwlFunction};
use crate::rational::{factorial, Rational};

/// Conditional expectations `E[f | x_S = y_S]`, cached by the mask of `S`.
struct Expectations<'a> {
    f: &'a PwlFunction,
    y: &'a [Rational],
    b: &'a InputBox,
    cache: HashMap<usize, Rational>,
}

impl Expectations<'_> {
    fn get(&mut self, mask: usize) -> Result<Rational, AnalysisError> {
        if let Some(v) = self.cache.get(&mask) {
            return Ok(v.clone());
        }
        let m = self.f.inputs();
        let fixed: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
        let v = if fixed.len() == m {
            pwl_eval(self.f, self.y)?
        } else {
            let g = pwl_restrict(self.f, &fixed.iter().map(|&j| (j, self.y[j].clone())).collect())?;
            let rest = self.b.without(&fixed);
            integrate_box(&g, &rest)? / rest.volume()
        };
        self.cache.insert(mask, v.clone());
        Ok(v)
    }
}

fn check(f: &PwlFunction, y: &[Rational], b: &InputBox) -> Result<(), AnalysisError> {
    let m = f.inputs();
    for found in [y.len(), b.dim()] {
        if found != m {
            return Err(AnalysisError::Dimension { expected: m, found });
        }
    }
    if !b.contains(y) {
        return Err(AnalysisError::OutsideBox);
    }
    Ok(())
}

fn shap_with(e: &mut Expectations<'_>, i: usize) -> Result<Rational, AnalysisError> {
    let m = e.f.inputs();
    if i >= m {
        return Err(AnalysisError::FeatureIndex(i));
    }
    let total = factorial(m);
    let mut acc = Rational::zero();
    for mask in 0..1usize << m {
        if mask >> i & 1 == 1 {
            continue;
        }
        let k = mask.count_ones() as usize;
        let w = factorial(k) * factorial(m - 1 - k) / &total;
        acc += w * (e.get(mask | 1 << i)? - e.get(mask)?);
    }
    Ok(acc)
}

/// Shapley value of feature `i` (0-based) at `y`, with features independent
/// and uniform on the sides of `b`.
pub fn shap(f: &PwlFunction, y: &[Rational], b: &InputBox, i: usize) -> Result<Rational, AnalysisError> {
    check(f, y, b)?;
    let mut e = Expectations {
        f,
        y,
        b,
        cache: HashMap::new(),
    };
    shap_with(&mut e, i)
}

/// Shapley values of all features, sharing the conditional expectations.
pub fn shap_all(f: &PwlFunction, y: &[Rational], b: &InputBox) -> Result<Vec<Rational>, AnalysisError> {
    check(f, y, b)?;
    let mut e = Expectations {
        f,
        y,
        b,
        cache: HashMap::new(),
    };
    (0..f.inputs()).map(|i| shap_with(&mut e, i)).collect()
}
