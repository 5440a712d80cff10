use std::cmp::Ordering;
use std::collections::HashMap;

use super::ast::{CmpOp, Formula, StdTerm, Term};
use crate::lifted::{lifted_compare, LiftedRational};
use crate::rational::Rational;
use crate::structure::{ElementId, WeightedStructure};

/// Assignment of domain elements to variable names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Valuation(HashMap<String, ElementId>);

impl Valuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: &str, e: ElementId) -> Self {
        self.0.insert(var.to_string(), e);
        self
    }

    pub fn get(&self, var: &str) -> Option<ElementId> {
        self.0.get(var).copied()
    }

    fn bind(&mut self, var: &str, e: ElementId) -> Option<ElementId> {
        self.0.insert(var.to_string(), e)
    }

    fn restore(&mut self, var: &str, old: Option<ElementId>) {
        match old {
            Some(e) => {
                self.0.insert(var.to_string(), e);
            }
            None => {
                self.0.remove(var);
            }
        }
    }
}

struct Evaluator<'a> {
    s: &'a WeightedStructure,
    v: Valuation,
}

impl Evaluator<'_> {
    /// An unbound variable or unknown constant has no denotation; callers map
    /// that to `⊥` or `false`.
    fn element(&self, t: &StdTerm) -> Option<ElementId> {
        match t {
            StdTerm::Var(x) => self.v.get(x),
            StdTerm::Const(c) => self.s.constant(c),
        }
    }

    fn elements(&self, args: &[StdTerm]) -> Option<Vec<ElementId>> {
        args.iter().map(|a| self.element(a)).collect()
    }

    fn term(&mut self, t: &Term) -> LiftedRational {
        match t {
            Term::Bottom => LiftedRational::Bottom,
            Term::Weight { symbol, args } => match self.elements(args) {
                Some(tuple) => self.s.weight(symbol, &tuple),
                None => LiftedRational::Bottom,
            },
            Term::Rational(rf) => {
                let mut values = Vec::with_capacity(rf.atoms.len());
                for a in &rf.atoms {
                    match self.term(a) {
                        LiftedRational::Value(r) => values.push(r),
                        LiftedRational::Bottom => return LiftedRational::Bottom,
                    }
                }
                let d = rf.denom.eval(&values);
                if d.is_zero() {
                    return LiftedRational::Bottom;
                }
                LiftedRational::Value(rf.numer.eval(&values) / d)
            }
            Term::Ite { cond, then, els } => {
                if self.formula(cond) {
                    self.term(then)
                } else {
                    self.term(els)
                }
            }
            Term::Sum { vars, guard, body } => {
                let mut acc = Rational::zero();
                let mut bottom = false;
                self.for_each_tuple(vars, &mut |ev| {
                    if bottom || !ev.formula(guard) {
                        return;
                    }
                    match ev.term(body) {
                        LiftedRational::Value(r) => acc += r,
                        LiftedRational::Bottom => bottom = true,
                    }
                });
                if bottom {
                    LiftedRational::Bottom
                } else {
                    LiftedRational::Value(acc)
                }
            }
        }
    }

    /// Visit every assignment of `vars` in domain order.
    fn for_each_tuple(&mut self, vars: &[String], f: &mut dyn FnMut(&mut Self)) {
        let Some((first, rest)) = vars.split_first() else {
            f(self);
            return;
        };
        for e in 0..self.s.domain_size() {
            let old = self.v.bind(first, ElementId(e));
            self.for_each_tuple(rest, f);
            self.v.restore(first, old);
        }
    }

    fn quantify(&mut self, var: &str, body: &Formula, want: bool) -> bool {
        for e in 0..self.s.domain_size() {
            let old = self.v.bind(var, ElementId(e));
            let r = self.formula(body);
            self.v.restore(var, old);
            if r == want {
                return want;
            }
        }
        !want
    }

    fn formula(&mut self, f: &Formula) -> bool {
        match f {
            Formula::Rel { symbol, args } => self
                .elements(args)
                .is_some_and(|t| self.s.holds(symbol, &t)),
            Formula::Equal(a, b) => match (self.element(a), self.element(b)) {
                (Some(x), Some(y)) => x == y,
                _ => false,
            },
            Formula::Compare { op, lhs, rhs } => {
                let l = self.term(lhs);
                let r = self.term(rhs);
                let ord = lifted_compare(&l, &r);
                match op {
                    CmpOp::Eq => ord == Ordering::Equal,
                    CmpOp::Lt => ord == Ordering::Less,
                }
            }
            Formula::Not(a) => !self.formula(a),
            Formula::And(a, b) => self.formula(a) && self.formula(b),
            Formula::Or(a, b) => self.formula(a) || self.formula(b),
            Formula::Implies(a, b) => !self.formula(a) || self.formula(b),
            Formula::Exists(x, body) => self.quantify(x, body, true),
            Formula::Forall(x, body) => self.quantify(x, body, false),
        }
    }
}

/// Value of a weight term; total, with all partiality reported as `⊥`.
pub fn eval_weight_term(s: &WeightedStructure, t: &Term, v: &Valuation) -> LiftedRational {
    Evaluator { s, v: v.clone() }.term(t)
}

/// Truth value of a formula; quantifiers range over the finite domain.
pub fn eval_formula(s: &WeightedStructure, f: &Formula, v: &Valuation) -> bool {
    Evaluator { s, v: v.clone() }.formula(f)
}
