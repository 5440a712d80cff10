use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::rational::Rational;

/// An element-valued term: a variable or a constant symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StdTerm {
    Var(String),
    Const(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Lt,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Rel {
        symbol: String,
        args: Vec<StdTerm>,
    },
    Equal(StdTerm, StdTerm),
    Compare {
        op: CmpOp,
        lhs: Box<Term>,
        rhs: Box<Term>,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Bottom,
    Weight {
        symbol: String,
        args: Vec<StdTerm>,
    },
    Rational(RationalFunction),
    Ite {
        cond: Box<Formula>,
        then: Box<Term>,
        els: Box<Term>,
    },
    Sum {
        vars: Vec<String>,
        guard: Box<Formula>,
        body: Box<Term>,
    },
}

/// Monomial exponents keyed by atom index.
pub type Exponents = Vec<(usize, u32)>;

/// A polynomial over atom indices with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Exponents, Rational>,
}

impl Polynomial {
    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        Polynomial { terms }
    }

    pub fn atom(index: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(index, 1)], Rational::one());
        Polynomial { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    fn insert(&mut self, e: Exponents, c: Rational) {
        let entry = self.terms.entry(e).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Polynomial::default();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let mut merged: BTreeMap<usize, u32> = e1.iter().copied().collect();
                for (i, k) in e2 {
                    *merged.entry(*i).or_insert(0) += k;
                }
                out.insert(merged.into_iter().collect(), c1 * c2);
            }
        }
        out
    }

    fn reindex(&self, f: impl Fn(usize) -> usize) -> Self {
        let mut out = Polynomial::default();
        for (e, c) in &self.terms {
            let mut merged: BTreeMap<usize, u32> = BTreeMap::new();
            for (i, k) in e {
                *merged.entry(f(*i)).or_insert(0) += k;
            }
            out.insert(merged.into_iter().collect(), c.clone());
        }
        out
    }

    pub fn eval(&self, values: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (i, k) in e {
                m *= values[*i].pow(*k);
            }
            acc += m;
        }
        acc
    }
}

/// `numer / denom` over the atoms. The denominator is kept as the literal
/// product of every divisor met while parsing, so it vanishes exactly when
/// some intermediate division was by zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    pub atoms: Vec<Term>,
    pub numer: Polynomial,
    pub denom: Polynomial,
}

impl RationalFunction {
    pub fn constant(c: Rational) -> Self {
        RationalFunction {
            atoms: Vec::new(),
            numer: Polynomial::constant(c),
            denom: Polynomial::constant(Rational::one()),
        }
    }

    /// Lift a term into fraction form; rational functions are returned as is.
    pub fn from_term(t: Term) -> Self {
        match t {
            Term::Rational(rf) => rf,
            other => RationalFunction {
                atoms: vec![other],
                numer: Polynomial::atom(0),
                denom: Polynomial::constant(Rational::one()),
            },
        }
    }

    /// Merge the atom lists of two fractions, returning the reindexed polynomials.
    fn align(a: Self, b: Self) -> (Vec<Term>, [Polynomial; 4]) {
        let mut atoms = a.atoms;
        let mut map = Vec::with_capacity(b.atoms.len());
        for t in b.atoms {
            match atoms.iter().position(|x| *x == t) {
                Some(i) => map.push(i),
                None => {
                    atoms.push(t);
                    map.push(atoms.len() - 1);
                }
            }
        }
        let bn = b.numer.reindex(|i| map[i]);
        let bd = b.denom.reindex(|i| map[i]);
        (atoms, [a.numer, a.denom, bn, bd])
    }

    pub fn add(a: Self, b: Self) -> Self {
        let (atoms, [an, ad, bn, bd]) = Self::align(a, b);
        RationalFunction {
            atoms,
            numer: an.mul(&bd).add(&bn.mul(&ad)),
            denom: ad.mul(&bd),
        }
    }

    pub fn sub(a: Self, b: Self) -> Self {
        Self::add(a, Self::neg(b))
    }

    pub fn neg(a: Self) -> Self {
        RationalFunction {
            numer: a.numer.neg(),
            ..a
        }
    }

    pub fn mul(a: Self, b: Self) -> Self {
        let (atoms, [an, ad, bn, bd]) = Self::align(a, b);
        RationalFunction {
            atoms,
            numer: an.mul(&bn),
            denom: ad.mul(&bd),
        }
    }

    pub fn div(a: Self, b: Self) -> Self {
        let (atoms, [an, ad, bn, bd]) = Self::align(a, b);
        RationalFunction {
            atoms,
            numer: an.mul(&bd),
            denom: ad.mul(&bn),
        }
    }

    /// The bare atom when the fraction is exactly `t / 1`.
    fn as_single_atom(&self) -> Option<&Term> {
        if self.atoms.len() == 1
            && self.numer == Polynomial::atom(0)
            && self.denom.as_constant() == Some(Rational::one())
        {
            Some(&self.atoms[0])
        } else {
            None
        }
    }
}

impl Term {
    pub fn constant(c: impl Into<Rational>) -> Term {
        Term::Rational(RationalFunction::constant(c.into()))
    }

    pub fn weight(symbol: &str, args: Vec<StdTerm>) -> Term {
        Term::Weight {
            symbol: symbol.to_string(),
            args,
        }
    }

    fn simplify(rf: RationalFunction) -> Term {
        match rf.as_single_atom() {
            Some(t) => t.clone(),
            None => Term::Rational(rf),
        }
    }

    pub fn add(self, other: Term) -> Term {
        Self::simplify(RationalFunction::add(
            RationalFunction::from_term(self),
            RationalFunction::from_term(other),
        ))
    }

    pub fn sub(self, other: Term) -> Term {
        Self::simplify(RationalFunction::sub(
            RationalFunction::from_term(self),
            RationalFunction::from_term(other),
        ))
    }

    pub fn mul(self, other: Term) -> Term {
        Self::simplify(RationalFunction::mul(
            RationalFunction::from_term(self),
            RationalFunction::from_term(other),
        ))
    }

    pub fn div(self, other: Term) -> Term {
        Self::simplify(RationalFunction::div(
            RationalFunction::from_term(self),
            RationalFunction::from_term(other),
        ))
    }

    pub fn neg(self) -> Term {
        Self::simplify(RationalFunction::neg(RationalFunction::from_term(self)))
    }

    pub fn ite(cond: Formula, then: Term, els: Term) -> Term {
        Term::Ite {
            cond: Box::new(cond),
            then: Box::new(then),
            els: Box::new(els),
        }
    }

    pub fn sum(vars: Vec<String>, guard: Formula, body: Term) -> Term {
        Term::Sum {
            vars,
            guard: Box::new(guard),
            body: Box::new(body),
        }
    }

    /// `if c > 0 then c else 0`
    pub fn relu(c: Term) -> Term {
        Term::ite(
            Formula::lt(Term::constant(0), c.clone()),
            c,
            Term::constant(0),
        )
    }

    /// `if c > 0 then c else -c`
    pub fn abs(c: Term) -> Term {
        Term::ite(
            Formula::lt(Term::constant(0), c.clone()),
            c.clone(),
            c.neg(),
        )
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Bottom => {}
            Term::Weight { args, .. } => collect_std(args, out),
            Term::Rational(rf) => rf.atoms.iter().for_each(|a| a.collect_free(out)),
            Term::Ite { cond, then, els } => {
                cond.collect_free(out);
                then.collect_free(out);
                els.collect_free(out);
            }
            Term::Sum { vars, guard, body } => {
                let mut inner = BTreeSet::new();
                guard.collect_free(&mut inner);
                body.collect_free(&mut inner);
                for v in vars {
                    inner.remove(v);
                }
                out.extend(inner);
            }
        }
    }
}

fn collect_std(args: &[StdTerm], out: &mut BTreeSet<String>) {
    for a in args {
        if let StdTerm::Var(v) = a {
            out.insert(v.clone());
        }
    }
}

impl Formula {
    pub fn rel(symbol: &str, args: Vec<StdTerm>) -> Formula {
        Formula::Rel {
            symbol: symbol.to_string(),
            args,
        }
    }

    pub fn lt(lhs: Term, rhs: Term) -> Formula {
        Formula::Compare {
            op: CmpOp::Lt,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn weq(lhs: Term, rhs: Term) -> Formula {
        Formula::Compare {
            op: CmpOp::Eq,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Rel { args, .. } => collect_std(args, out),
            Formula::Equal(a, b) => collect_std(&[a.clone(), b.clone()], out),
            Formula::Compare { lhs, rhs, .. } => {
                lhs.collect_free(out);
                rhs.collect_free(out);
            }
            Formula::Not(f) => f.collect_free(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let mut inner = BTreeSet::new();
                f.collect_free(&mut inner);
                inner.remove(v);
                out.extend(inner);
            }
        }
    }
}

impl fmt::Display for StdTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StdTerm::Var(v) | StdTerm::Const(v) => write!(f, "{v}"),
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, symbol: &str, args: &[StdTerm]) -> fmt::Result {
    write!(f, "{symbol}")?;
    if !args.is_empty() {
        let joined: Vec<String> = args.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", joined.join(", "))?;
    }
    Ok(())
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &Polynomial, atoms: &[Term]) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    let mut first = true;
    for (e, c) in p.monomials() {
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        let mut parts = vec![format!("({c})")];
        for (i, k) in e {
            for _ in 0..*k {
                parts.push(format!("({})", atoms[*i]));
            }
        }
        write!(f, "{}", parts.join(" * "))?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Bottom => write!(f, "bot"),
            Term::Weight { symbol, args } => write_args(f, symbol, args),
            Term::Rational(rf) => {
                if let Some(c) = rf
                    .numer
                    .as_constant()
                    .filter(|_| rf.denom.as_constant() == Some(Rational::one()))
                {
                    return write!(f, "({c})");
                }
                write!(f, "(")?;
                write_poly(f, &rf.numer, &rf.atoms)?;
                write!(f, ") / (")?;
                write_poly(f, &rf.denom, &rf.atoms)?;
                write!(f, ")")
            }
            Term::Ite { cond, then, els } => write!(f, "(if {cond} then {then} else {els})"),
            Term::Sum { vars, guard, body } => {
                write!(f, "(sum{{{} : {guard}}} ({body}))", vars.join(", "))
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Rel { symbol, args } => write_args(f, symbol, args),
            Formula::Equal(a, b) => write!(f, "{a} = {b}"),
            Formula::Compare {
                op: CmpOp::Eq,
                lhs,
                rhs,
            } => write!(f, "{lhs} = {rhs}"),
            Formula::Compare {
                op: CmpOp::Lt,
                lhs,
                rhs,
            } => write!(f, "{lhs} < {rhs}"),
            Formula::Not(a) => write!(f, "not ({a})"),
            Formula::And(a, b) => write!(f, "({a}) and ({b})"),
            Formula::Or(a, b) => write!(f, "({a}) or ({b})"),
            Formula::Implies(a, b) => write!(f, "({a}) implies ({b})"),
            Formula::Exists(v, a) => write!(f, "exists {v} . ({a})"),
            Formula::Forall(v, a) => write!(f, "forall {v} . ({a})"),
        }
    }
}
