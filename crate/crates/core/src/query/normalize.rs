//! Ordered prenex normal form.
//!
//! The pipeline substitutes parameters, renames bound variables apart,
//! removes implications and negations down to comparisons, replaces every
//! inline `F(e)` by a fresh result variable, splits `abs`, `min` and `max` by
//! cases, pulls quantifiers to the front and finally compiles each comparison
//! to strict atoms `g > 0`.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::syntax::{CmpRel, Expr, QueryAst};
use crate::affine::AffineFunctional;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("non-linear term `{0}`")]
    NonLinear(String),
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("free variable `{0}` is also a parameter")]
    ParameterClash(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

/// Quantifier-free matrix over variables `x_0..x_{d-1}` (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Matrix {
    True,
    False,
    /// `g > 0`
    Atom(AffineFunctional),
    /// `F(x_{args}) = x_result` with strictly increasing `args` below `result`.
    FAtom {
        args: Vec<usize>,
        result: usize,
    },
    Not(Box<Matrix>),
    And(Vec<Matrix>),
    Or(Vec<Matrix>),
}

impl Matrix {
    pub fn has_f_atom(&self) -> bool {
        match self {
            Matrix::FAtom { .. } => true,
            Matrix::Not(a) => a.has_f_atom(),
            Matrix::And(xs) | Matrix::Or(xs) => xs.iter().any(Matrix::has_f_atom),
            _ => false,
        }
    }

    /// Strict atoms occurring in the matrix.
    pub fn atoms(&self) -> Vec<&AffineFunctional> {
        let mut out = Vec::new();
        fn go<'a>(m: &'a Matrix, out: &mut Vec<&'a AffineFunctional>) {
            match m {
                Matrix::Atom(g) => out.push(g),
                Matrix::Not(a) => go(a, out),
                Matrix::And(xs) | Matrix::Or(xs) => xs.iter().for_each(|x| go(x, out)),
                _ => {}
            }
        }
        go(self, &mut out);
        out
    }

    /// Truth at a point, with `f` computing the network function.
    pub fn eval(&self, x: &[Rational], f: &dyn Fn(&[Rational]) -> Rational) -> bool {
        match self {
            Matrix::True => true,
            Matrix::False => false,
            Matrix::Atom(g) => g.eval(x).is_positive(),
            Matrix::FAtom { args, result } => {
                let a: Vec<Rational> = args.iter().map(|&i| x[i].clone()).collect();
                f(&a) == x[*result]
            }
            Matrix::Not(a) => !a.eval(x, f),
            Matrix::And(xs) => xs.iter().all(|m| m.eval(x, f)),
            Matrix::Or(xs) => xs.iter().any(|m| m.eval(x, f)),
        }
    }
}

/// `Q_{k+1} x_{k+1} ... Q_d x_d matrix` with the first `free` variables free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedPrenexQuery {
    pub variables: Vec<String>,
    pub free: usize,
    pub prefix: Vec<Quantifier>,
    pub matrix: Matrix,
}

impl OrderedPrenexQuery {
    pub fn dim(&self) -> usize {
        self.variables.len()
    }
}

/// Formula in negation normal form: negation only survives on `F`-atoms.
#[derive(Debug, Clone)]
enum Nnf {
    True,
    False,
    Cmp(Expr, CmpRel, Expr),
    FAtom {
        args: Vec<String>,
        result: String,
        positive: bool,
    },
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
    Exists(String, Box<Nnf>),
    Forall(String, Box<Nnf>),
}

struct Normalizer<'a> {
    params: &'a BTreeMap<String, Rational>,
    used: HashSet<String>,
    fresh: usize,
    /// Rank of each variable in the final order (free first, then by nesting).
    free_rank: HashMap<String, usize>,
}

impl Normalizer<'_> {
    fn fresh(&mut self, stem: &str) -> String {
        loop {
            self.fresh += 1;
            let name = format!("{stem}#{}", self.fresh);
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    fn rename_expr(
        &self,
        e: &Expr,
        scope: &HashMap<String, String>,
    ) -> Result<Expr, NormalizeError> {
        let r = |x: &Expr| self.rename_expr(x, scope).map(Box::new);
        let rl = |xs: &[Expr]| {
            xs.iter()
                .map(|x| self.rename_expr(x, scope))
                .collect::<Result<Vec<_>, _>>()
        };
        Ok(match e {
            Expr::Const(c) => Expr::Const(c.clone()),
            Expr::Var(v) => match scope.get(v) {
                Some(n) => Expr::Var(n.clone()),
                None => match self.params.get(v) {
                    Some(c) => Expr::Const(c.clone()),
                    None if self.free_rank.contains_key(v) => Expr::Var(v.clone()),
                    None => return Err(NormalizeError::UnknownVariable(v.clone())),
                },
            },
            Expr::Add(a, b) => Expr::Add(r(a)?, r(b)?),
            Expr::Sub(a, b) => Expr::Sub(r(a)?, r(b)?),
            Expr::Neg(a) => Expr::Neg(r(a)?),
            Expr::Mul(a, b) => Expr::Mul(r(a)?, r(b)?),
            Expr::Div(a, b) => Expr::Div(r(a)?, r(b)?),
            Expr::F(args) => Expr::F(rl(args)?),
            Expr::Abs(a) => Expr::Abs(r(a)?),
            Expr::Min(a, b) => Expr::Min(r(a)?, r(b)?),
            Expr::Max(a, b) => Expr::Max(r(a)?, r(b)?),
            Expr::DistLinf(a, b) => Expr::DistLinf(rl(a)?, rl(b)?),
            Expr::DistL1(a, b) => Expr::DistL1(rl(a)?, rl(b)?),
        })
    }

    /// Rename apart and push negations inward. `depth` ranks bound variables.
    fn nnf(
        &mut self,
        q: &QueryAst,
        positive: bool,
        scope: &mut HashMap<String, String>,
        ranks: &mut HashMap<String, usize>,
    ) -> Result<Nnf, NormalizeError> {
        Ok(match q {
            QueryAst::True => {
                if positive {
                    Nnf::True
                } else {
                    Nnf::False
                }
            }
            QueryAst::False => {
                if positive {
                    Nnf::False
                } else {
                    Nnf::True
                }
            }
            QueryAst::Cmp(a, r, b) => {
                let (a, b) = (self.rename_expr(a, scope)?, self.rename_expr(b, scope)?);
                let r = if positive { *r } else { r.negate() };
                self.eliminate_f(a, r, b, ranks)
            }
            QueryAst::Not(a) => self.nnf(a, !positive, scope, ranks)?,
            QueryAst::And(a, b) | QueryAst::Or(a, b) => {
                let x = self.nnf(a, positive, scope, ranks)?;
                let y = self.nnf(b, positive, scope, ranks)?;
                if matches!(q, QueryAst::And(..)) == positive {
                    Nnf::And(vec![x, y])
                } else {
                    Nnf::Or(vec![x, y])
                }
            }
            QueryAst::Implies(a, b) => {
                let x = self.nnf(a, !positive, scope, ranks)?;
                let y = self.nnf(b, positive, scope, ranks)?;
                if positive {
                    Nnf::Or(vec![x, y])
                } else {
                    Nnf::And(vec![x, y])
                }
            }
            QueryAst::Exists(v, a) | QueryAst::Forall(v, a) => {
                let name = if self.used.insert(v.clone()) {
                    v.clone()
                } else {
                    self.fresh(v)
                };
                let prev = scope.insert(v.clone(), name.clone());
                let rank = ranks.len();
                ranks.insert(name.clone(), rank);
                let body = self.nnf(a, positive, scope, ranks)?;
                ranks.remove(&name);
                match prev {
                    Some(p) => scope.insert(v.clone(), p),
                    None => scope.remove(v),
                };
                if matches!(q, QueryAst::Exists(..)) == positive {
                    Nnf::Exists(name, Box::new(body))
                } else {
                    Nnf::Forall(name, Box::new(body))
                }
            }
        })
    }

    /// Replace `F` applications in `a r b` by fresh result variables bound
    /// existentially around the comparison. A comparison that already has the
    /// ordered shape `F(x..) = y` becomes an `F`-atom directly.
    fn eliminate_f(
        &mut self,
        a: Expr,
        r: CmpRel,
        b: Expr,
        ranks: &mut HashMap<String, usize>,
    ) -> Nnf {
        if !a.uses_f() && !b.uses_f() {
            return Nnf::Cmp(a, r, b);
        }
        if matches!(r, CmpRel::Eq | CmpRel::Ne) {
            let direct = match (&a, &b) {
                (Expr::F(args), Expr::Var(y)) | (Expr::Var(y), Expr::F(args)) => {
                    self.ordered_args(args, y, ranks)
                }
                _ => None,
            };
            if let Some((args, result)) = direct {
                return Nnf::FAtom {
                    args,
                    result,
                    positive: r == CmpRel::Eq,
                };
            }
        }
        let mut binders: Vec<String> = Vec::new();
        let mut conjuncts: Vec<Nnf> = Vec::new();
        let a = self.lift_f(a, &mut binders, &mut conjuncts, ranks);
        let b = self.lift_f(b, &mut binders, &mut conjuncts, ranks);
        conjuncts.push(Nnf::Cmp(a, r, b));
        let mut out = Nnf::And(conjuncts);
        for v in binders.into_iter().rev() {
            ranks.remove(&v);
            out = Nnf::Exists(v, Box::new(out));
        }
        out
    }

    fn rank(&self, v: &str, ranks: &HashMap<String, usize>) -> Option<usize> {
        self.free_rank
            .get(v)
            .copied()
            .or_else(|| ranks.get(v).map(|r| r + self.free_rank.len()))
    }

    /// Names of the arguments if they are variables in strictly increasing order.
    fn plain_args(&self, args: &[Expr], ranks: &HashMap<String, usize>) -> Option<Vec<String>> {
        let mut names = Vec::new();
        let mut last: Option<usize> = None;
        for e in args {
            let Expr::Var(v) = e else { return None };
            let r = self.rank(v, ranks)?;
            if last.is_some_and(|l| l >= r) {
                return None;
            }
            last = Some(r);
            names.push(v.clone());
        }
        Some(names)
    }

    /// Plain ordered arguments that all precede `y`.
    fn ordered_args(
        &self,
        args: &[Expr],
        y: &str,
        ranks: &HashMap<String, usize>,
    ) -> Option<(Vec<String>, String)> {
        let names = self.plain_args(args, ranks)?;
        let ry = self.rank(y, ranks)?;
        let last = names.last().and_then(|v| self.rank(v, ranks));
        last.map_or(true, |l| l < ry)
            .then(|| (names, y.to_string()))
    }

    fn bind(
        &mut self,
        stem: &str,
        binders: &mut Vec<String>,
        ranks: &mut HashMap<String, usize>,
    ) -> String {
        let v = self.fresh(stem);
        let rank = ranks.len();
        ranks.insert(v.clone(), rank);
        binders.push(v.clone());
        v
    }

    fn lift_f(
        &mut self,
        e: Expr,
        binders: &mut Vec<String>,
        conj: &mut Vec<Nnf>,
        ranks: &mut HashMap<String, usize>,
    ) -> Expr {
        macro_rules! rec {
            ($x:expr) => {
                Box::new(self.lift_f(*$x, binders, conj, ranks))
            };
        }
        match e {
            Expr::F(args) => {
                let args: Vec<Expr> = args
                    .into_iter()
                    .map(|a| self.lift_f(a, binders, conj, ranks))
                    .collect();
                let names = match self.plain_args(&args, ranks) {
                    Some(names) => names,
                    None => args
                        .into_iter()
                        .map(|a| {
                            let u = self.bind("u", binders, ranks);
                            conj.push(Nnf::Cmp(Expr::Var(u.clone()), CmpRel::Eq, a));
                            u
                        })
                        .collect(),
                };
                let z = self.bind("z", binders, ranks);
                conj.push(Nnf::FAtom {
                    args: names,
                    result: z.clone(),
                    positive: true,
                });
                Expr::Var(z)
            }
            Expr::Const(_) | Expr::Var(_) => e,
            Expr::Add(a, b) => Expr::Add(rec!(a), rec!(b)),
            Expr::Sub(a, b) => Expr::Sub(rec!(a), rec!(b)),
            Expr::Neg(a) => Expr::Neg(rec!(a)),
            Expr::Mul(a, b) => Expr::Mul(rec!(a), rec!(b)),
            Expr::Div(a, b) => Expr::Div(rec!(a), rec!(b)),
            Expr::Abs(a) => Expr::Abs(rec!(a)),
            Expr::Min(a, b) => Expr::Min(rec!(a), rec!(b)),
            Expr::Max(a, b) => Expr::Max(rec!(a), rec!(b)),
            Expr::DistLinf(a, b) => {
                let (a, b) = self.lift_pair(a, b, binders, conj, ranks);
                Expr::DistLinf(a, b)
            }
            Expr::DistL1(a, b) => {
                let (a, b) = self.lift_pair(a, b, binders, conj, ranks);
                Expr::DistL1(a, b)
            }
        }
    }

    fn lift_pair(
        &mut self,
        a: Vec<Expr>,
        b: Vec<Expr>,
        binders: &mut Vec<String>,
        conj: &mut Vec<Nnf>,
        ranks: &mut HashMap<String, usize>,
    ) -> (Vec<Expr>, Vec<Expr>) {
        let a = a
            .into_iter()
            .map(|x| self.lift_f(x, binders, conj, ranks))
            .collect();
        let b = b
            .into_iter()
            .map(|x| self.lift_f(x, binders, conj, ranks))
            .collect();
        (a, b)
    }
}

/// Rewrite distances as `max`/`abs` compositions.
fn expand_dist(e: Expr) -> Expr {
    let b = |x: Box<Expr>| Box::new(expand_dist(*x));
    match e {
        Expr::DistLinf(a, c) => dist_terms(a, c, true),
        Expr::DistL1(a, c) => dist_terms(a, c, false),
        Expr::Const(_) | Expr::Var(_) | Expr::F(_) => e,
        Expr::Add(x, y) => Expr::Add(b(x), b(y)),
        Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
        Expr::Neg(x) => Expr::Neg(b(x)),
        Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
        Expr::Div(x, y) => Expr::Div(b(x), b(y)),
        Expr::Abs(x) => Expr::Abs(b(x)),
        Expr::Min(x, y) => Expr::Min(b(x), b(y)),
        Expr::Max(x, y) => Expr::Max(b(x), b(y)),
    }
}

fn dist_terms(a: Vec<Expr>, c: Vec<Expr>, linf: bool) -> Expr {
    let terms: Vec<Expr> = a
        .into_iter()
        .zip(c)
        .map(|(x, y)| {
            Expr::Abs(Box::new(Expr::Sub(
                Box::new(expand_dist(x)),
                Box::new(expand_dist(y)),
            )))
        })
        .collect();
    let mut it = terms.into_iter();
    let first = it.next().expect("distance over at least one coordinate");
    it.fold(first, |acc, t| {
        if linf {
            Expr::Max(Box::new(acc), Box::new(t))
        } else {
            Expr::Add(Box::new(acc), Box::new(t))
        }
    })
}

fn is_piecewise(e: &Expr) -> bool {
    e.any(&|x| matches!(x, Expr::Abs(_) | Expr::Min(..) | Expr::Max(..)))
}

/// An `abs`/`min`/`max` node whose arguments contain no further such node.
fn innermost_piecewise(e: &Expr) -> Option<&Expr> {
    match e {
        Expr::Abs(a) => innermost_piecewise(a).or(Some(e)),
        Expr::Min(a, b) | Expr::Max(a, b) => innermost_piecewise(a)
            .or_else(|| innermost_piecewise(b))
            .or(Some(e)),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            innermost_piecewise(a).or_else(|| innermost_piecewise(b))
        }
        Expr::Neg(a) => innermost_piecewise(a),
        _ => None,
    }
}

fn replace(e: &Expr, target: &Expr, with: &Expr) -> Expr {
    if e == target {
        return with.clone();
    }
    let r = |x: &Expr| Box::new(replace(x, target, with));
    match e {
        Expr::Add(a, b) => Expr::Add(r(a), r(b)),
        Expr::Sub(a, b) => Expr::Sub(r(a), r(b)),
        Expr::Neg(a) => Expr::Neg(r(a)),
        Expr::Mul(a, b) => Expr::Mul(r(a), r(b)),
        Expr::Div(a, b) => Expr::Div(r(a), r(b)),
        Expr::Abs(a) => Expr::Abs(r(a)),
        Expr::Min(a, b) => Expr::Min(r(a), r(b)),
        Expr::Max(a, b) => Expr::Max(r(a), r(b)),
        other => other.clone(),
    }
}

fn zero() -> Expr {
    Expr::Const(Rational::zero())
}

/// Case-split `a r b` until no `abs`, `min` or `max` remains.
fn split(a: Expr, r: CmpRel, b: Expr) -> Nnf {
    if !is_piecewise(&a) && !is_piecewise(&b) {
        return Nnf::Cmp(a, r, b);
    }
    if !is_piecewise(&a) {
        return split(b, r.swap(), a);
    }
    // Monotone shapes at the top of the left side.
    if !is_piecewise(&b) && matches!(r, CmpRel::Lt | CmpRel::Le | CmpRel::Gt | CmpRel::Ge) {
        let below = matches!(r, CmpRel::Lt | CmpRel::Le);
        match &a {
            Expr::Abs(t) => {
                let parts = vec![
                    split((**t).clone(), r, b.clone()),
                    split(Expr::Neg(t.clone()), r, b),
                ];
                return if below {
                    Nnf::And(parts)
                } else {
                    Nnf::Or(parts)
                };
            }
            Expr::Max(x, y) | Expr::Min(x, y) => {
                let parts = vec![
                    split((**x).clone(), r, b.clone()),
                    split((**y).clone(), r, b),
                ];
                let is_max = matches!(a, Expr::Max(..));
                return if below == is_max {
                    Nnf::And(parts)
                } else {
                    Nnf::Or(parts)
                };
            }
            _ => {}
        }
    }
    let node = innermost_piecewise(&a)
        .or_else(|| innermost_piecewise(&b))
        .unwrap()
        .clone();
    let case = |guard: Nnf, with: Expr| {
        Nnf::And(vec![
            guard,
            split(replace(&a, &node, &with), r, replace(&b, &node, &with)),
        ])
    };
    match &node {
        Expr::Abs(t) => Nnf::Or(vec![
            case(Nnf::Cmp((**t).clone(), CmpRel::Ge, zero()), (**t).clone()),
            case(
                Nnf::Cmp((**t).clone(), CmpRel::Lt, zero()),
                Expr::Neg(t.clone()),
            ),
        ]),
        Expr::Min(x, y) => Nnf::Or(vec![
            case(
                Nnf::Cmp((**x).clone(), CmpRel::Le, (**y).clone()),
                (**x).clone(),
            ),
            case(
                Nnf::Cmp((**x).clone(), CmpRel::Gt, (**y).clone()),
                (**y).clone(),
            ),
        ]),
        Expr::Max(x, y) => Nnf::Or(vec![
            case(
                Nnf::Cmp((**x).clone(), CmpRel::Ge, (**y).clone()),
                (**x).clone(),
            ),
            case(
                Nnf::Cmp((**x).clone(), CmpRel::Lt, (**y).clone()),
                (**y).clone(),
            ),
        ]),
        _ => unreachable!(),
    }
}

fn split_all(n: Nnf) -> Nnf {
    match n {
        Nnf::Cmp(a, r, b) => split(expand_dist(a), r, expand_dist(b)),
        Nnf::And(xs) => Nnf::And(xs.into_iter().map(split_all).collect()),
        Nnf::Or(xs) => Nnf::Or(xs.into_iter().map(split_all).collect()),
        Nnf::Exists(v, a) => Nnf::Exists(v, Box::new(split_all(*a))),
        Nnf::Forall(v, a) => Nnf::Forall(v, Box::new(split_all(*a))),
        other => other,
    }
}

/// Strip quantifiers in depth-first order; names are already distinct.
fn prenex(n: Nnf, prefix: &mut Vec<(Quantifier, String)>) -> Nnf {
    match n {
        Nnf::Exists(v, a) => {
            prefix.push((Quantifier::Exists, v));
            prenex(*a, prefix)
        }
        Nnf::Forall(v, a) => {
            prefix.push((Quantifier::Forall, v));
            prenex(*a, prefix)
        }
        Nnf::And(xs) => Nnf::And(xs.into_iter().map(|x| prenex(x, prefix)).collect()),
        Nnf::Or(xs) => Nnf::Or(xs.into_iter().map(|x| prenex(x, prefix)).collect()),
        other => other,
    }
}

/// Affine form of a linear expression over `index`.
pub(crate) fn linearize(
    e: &Expr,
    index: &HashMap<String, usize>,
) -> Result<AffineFunctional, NormalizeError> {
    let d = index.len();
    Ok(match e {
        Expr::Const(c) => AffineFunctional::constant(d, c.clone()),
        Expr::Var(v) => AffineFunctional::coordinate(
            d,
            *index
                .get(v)
                .ok_or_else(|| NormalizeError::UnknownVariable(v.clone()))?,
        ),
        Expr::Add(a, b) => linearize(a, index)?.add(&linearize(b, index)?),
        Expr::Sub(a, b) => linearize(a, index)?.sub(&linearize(b, index)?),
        Expr::Neg(a) => linearize(a, index)?.neg(),
        Expr::Mul(a, b) => {
            let (x, y) = (linearize(a, index)?, linearize(b, index)?);
            if x.is_constant() {
                y.scale(x.constant_term())
            } else if y.is_constant() {
                x.scale(y.constant_term())
            } else {
                return Err(NormalizeError::NonLinear(e.to_string()));
            }
        }
        Expr::Div(a, b) => {
            let (x, y) = (linearize(a, index)?, linearize(b, index)?);
            if !y.is_constant() {
                return Err(NormalizeError::NonLinear(e.to_string()));
            }
            if y.constant_term().is_zero() {
                return Err(NormalizeError::DivisionByZero(e.to_string()));
            }
            x.scale(&y.constant_term().recip())
        }
        _ => unreachable!("sugar is eliminated before linearisation"),
    })
}

fn compile(n: &Nnf, index: &HashMap<String, usize>) -> Result<Matrix, NormalizeError> {
    Ok(match n {
        Nnf::True => Matrix::True,
        Nnf::False => Matrix::False,
        Nnf::Cmp(a, r, b) => {
            let g = linearize(a, index)?.sub(&linearize(b, index)?);
            if g.is_constant() {
                let s = g.constant_term().signum();
                let holds = match r {
                    CmpRel::Lt => s < 0,
                    CmpRel::Le => s <= 0,
                    CmpRel::Eq => s == 0,
                    CmpRel::Ge => s >= 0,
                    CmpRel::Gt => s > 0,
                    CmpRel::Ne => s != 0,
                };
                return Ok(if holds { Matrix::True } else { Matrix::False });
            }
            let pos = || Matrix::Atom(g.clone());
            let neg = || Matrix::Atom(g.neg());
            let not = |m: Matrix| Matrix::Not(Box::new(m));
            match r {
                CmpRel::Gt => pos(),
                CmpRel::Lt => neg(),
                CmpRel::Ge => not(neg()),
                CmpRel::Le => not(pos()),
                CmpRel::Eq => Matrix::And(vec![not(pos()), not(neg())]),
                CmpRel::Ne => Matrix::Or(vec![pos(), neg()]),
            }
        }
        Nnf::FAtom {
            args,
            result,
            positive,
        } => {
            let atom = Matrix::FAtom {
                args: args.iter().map(|a| index[a]).collect(),
                result: index[result],
            };
            if *positive {
                atom
            } else {
                Matrix::Not(Box::new(atom))
            }
        }
        Nnf::And(xs) => Matrix::And(
            xs.iter()
                .map(|x| compile(x, index))
                .collect::<Result<_, _>>()?,
        ),
        Nnf::Or(xs) => Matrix::Or(
            xs.iter()
                .map(|x| compile(x, index))
                .collect::<Result<_, _>>()?,
        ),
        Nnf::Exists(..) | Nnf::Forall(..) => {
            unreachable!("quantifiers are stripped before compilation")
        }
    })
}

/// Bring `q` into ordered prenex form. Parameters are substituted as
/// constants; `free` lists the variables left open, in order.
pub fn normalize_ordered_prenex(
    q: &QueryAst,
    params: &BTreeMap<String, Rational>,
    free: &[String],
) -> Result<OrderedPrenexQuery, NormalizeError> {
    if let Some(v) = free.iter().find(|v| params.contains_key(*v)) {
        return Err(NormalizeError::ParameterClash(v.clone()));
    }
    let mut used: HashSet<String> = free.iter().cloned().collect();
    used.extend(params.keys().cloned());
    let free_rank = free
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    let mut nz = Normalizer {
        params,
        used,
        fresh: 0,
        free_rank,
    };
    let nnf = nz.nnf(q, true, &mut HashMap::new(), &mut HashMap::new())?;
    let nnf = split_all(nnf);
    let mut prefix = Vec::new();
    let matrix = prenex(nnf, &mut prefix);
    let mut variables: Vec<String> = free.to_vec();
    variables.extend(prefix.iter().map(|(_, v)| v.clone()));
    let index: HashMap<String, usize> = variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    let matrix = compile(&matrix, &index)?;
    Ok(OrderedPrenexQuery {
        variables,
        free: free.len(),
        prefix: prefix.into_iter().map(|(q, _)| q).collect(),
        matrix,
    })
}
