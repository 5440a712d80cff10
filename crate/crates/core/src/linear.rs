//! Exact linear feasibility and optimisation over the rationals.
//!
//! [`feasible_point`] decides systems of strict, non-strict and equality
//! constraints by Fourier–Motzkin elimination and reconstructs a witness by
//! back-substitution. [`LinearProgram`] is a dense two-phase simplex using
//! Bland's rule, so it terminates without any tolerance handling.

use std::collections::HashMap;

use crate::affine::{AffineFunctional, Sign};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    /// `f > 0`
    Gt,
    /// `f ≥ 0`
    Ge,
    /// `f = 0`
    Eq,
}

/// The constraint `f rel 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub f: AffineFunctional,
    pub rel: Rel,
}

impl Constraint {
    pub fn new(f: AffineFunctional, rel: Rel) -> Self {
        Constraint { f, rel }
    }

    /// The constraint placing `x` on side `s` of `f = 0`.
    pub fn side(f: &AffineFunctional, s: Sign) -> Self {
        match s {
            Sign::Pos => Constraint::new(f.clone(), Rel::Gt),
            Sign::Neg => Constraint::new(f.neg(), Rel::Gt),
            Sign::Zero => Constraint::new(f.clone(), Rel::Eq),
        }
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let v = self.f.eval(x);
        match self.rel {
            Rel::Gt => v.is_positive(),
            Rel::Ge => !v.is_negative(),
            Rel::Eq => v.is_zero(),
        }
    }
}

/// Bounds on the eliminated variable, recorded for back-substitution.
enum Elimination {
    /// `x_k = f(x_1..x_{k-1})`
    Defined(AffineFunctional),
    /// Lower and upper bounds `x_k ≥/> f` and `x_k ≤/< f`, with strictness.
    Bounds {
        lower: Vec<(AffineFunctional, bool)>,
        upper: Vec<(AffineFunctional, bool)>,
    },
}

/// Scale to make the last nonzero variable coefficient ±1 and drop trivial rows.
/// Returns `Err(())` when a constant constraint is violated.
fn normalise(c: Constraint) -> Result<Option<Constraint>, ()> {
    let Some(pivot) = c.f.linear().iter().rposition(|a| !a.is_zero()) else {
        let v = c.f.constant_term();
        let ok = match c.rel {
            Rel::Gt => v.is_positive(),
            Rel::Ge => !v.is_negative(),
            Rel::Eq => v.is_zero(),
        };
        return if ok { Ok(None) } else { Err(()) };
    };
    let scale = c.f.coeff(pivot).abs().recip();
    let mut f = c.f.scale(&scale);
    if c.rel == Rel::Eq && f.coeff(pivot).is_negative() {
        f = f.neg();
    }
    Ok(Some(Constraint { f, rel: c.rel }))
}

/// Merge duplicate constraints, keeping the strict version when both occur.
fn dedup(cs: Vec<Constraint>) -> Vec<Constraint> {
    let mut seen: HashMap<(AffineFunctional, bool), usize> = HashMap::new();
    let mut out: Vec<Constraint> = Vec::new();
    for c in cs {
        let key = (c.f.clone(), c.rel == Rel::Eq);
        match seen.get(&key) {
            Some(&i) => {
                if c.rel == Rel::Gt {
                    out[i].rel = Rel::Gt;
                }
            }
            None => {
                seen.insert(key, out.len());
                out.push(c);
            }
        }
    }
    out
}

/// A point of `R^dim` satisfying every constraint, or `None` if the system is
/// infeasible. All constraints must have dimension `dim`.
pub fn feasible_point(dim: usize, constraints: &[Constraint]) -> Option<Vec<Rational>> {
    let mut current = Vec::new();
    for c in constraints {
        debug_assert_eq!(c.f.dim(), dim);
        if let Some(c) = normalise(c.clone()).ok()? {
            current.push(c);
        }
    }
    let mut current = dedup(current);
    let mut steps = Vec::with_capacity(dim);
    for k in (0..dim).rev() {
        // Variable k is the last one; after elimination the dimension shrinks by one.
        let drop_last = |f: &AffineFunctional| AffineFunctional::new(f.coeffs()[..=k].to_vec());
        let (with, without): (Vec<_>, Vec<_>) =
            current.into_iter().partition(|c| !c.f.coeff(k).is_zero());
        let mut next = Vec::new();
        for c in &without {
            next.push(Constraint::new(drop_last(&c.f), c.rel));
        }
        if let Some(eq) = with.iter().find(|c| c.rel == Rel::Eq) {
            // x_k = -(rest)/a_k
            let a = eq.f.coeff(k).clone();
            let def = drop_last(&eq.f).scale(&(-a.recip()));
            for c in &with {
                let b = c.f.coeff(k);
                let g = drop_last(&c.f).add(&def.scale(b));
                if let Some(n) = normalise(Constraint::new(g, c.rel)).ok()? {
                    next.push(n);
                }
            }
            steps.push(Elimination::Defined(def));
        } else {
            let mut lower = Vec::new();
            let mut upper = Vec::new();
            for c in &with {
                let a = c.f.coeff(k);
                // a x_k + r rel 0  =>  x_k rel' -r/a
                let bound = drop_last(&c.f).scale(&(-a.recip()));
                let strict = c.rel == Rel::Gt;
                if a.is_positive() {
                    lower.push((bound, strict));
                } else {
                    upper.push((bound, strict));
                }
            }
            for (l, ls) in &lower {
                for (u, us) in &upper {
                    let rel = if *ls || *us { Rel::Gt } else { Rel::Ge };
                    if let Some(n) = normalise(Constraint::new(u.sub(l), rel)).ok()? {
                        next.push(n);
                    }
                }
            }
            steps.push(Elimination::Bounds { lower, upper });
        }
        current = dedup(next);
    }
    // Every remaining constraint is constant and was checked by `normalise`.
    let mut x: Vec<Rational> = Vec::with_capacity(dim);
    for step in steps.iter().rev() {
        let v = match step {
            Elimination::Defined(f) => f.eval(&x),
            Elimination::Bounds { lower, upper } => {
                let pick = |bs: &[(AffineFunctional, bool)], want_max: bool| {
                    let mut best: Option<(Rational, bool)> = None;
                    for (f, strict) in bs {
                        let v = f.eval(&x);
                        best = match best {
                            None => Some((v, *strict)),
                            Some((b, s)) => {
                                if v == b {
                                    Some((b, s || *strict))
                                } else if (v > b) == want_max {
                                    Some((v, *strict))
                                } else {
                                    Some((b, s))
                                }
                            }
                        }
                    }
                    best
                };
                match (pick(lower, true), pick(upper, false)) {
                    (Some((l, _)), Some((u, _))) if l < u => (l + u) / Rational::from_int(2),
                    (Some((l, false)), Some((u, false))) if l == u => l,
                    (Some(_), Some(_)) => return None,
                    (Some((l, s)), None) => {
                        if s {
                            l + Rational::one()
                        } else {
                            l
                        }
                    }
                    (None, Some((u, s))) => {
                        if s {
                            u - Rational::one()
                        } else {
                            u
                        }
                    }
                    (None, None) => Rational::zero(),
                }
            }
        };
        x.push(v);
    }
    debug_assert!(constraints.iter().all(|c| c.holds(&x)));
    Some(x)
}

pub fn is_feasible(dim: usize, constraints: &[Constraint]) -> bool {
    feasible_point(dim, constraints).is_some()
}

/// Feasibility by linear programming instead of elimination: strict rows get a
/// common slack `t ≤ 1` that is maximised, and the system is feasible exactly
/// when the optimum keeps `t > 0`.
pub fn lp_feasible_point(dim: usize, constraints: &[Constraint]) -> Option<Vec<Rational>> {
    let mut lp = LinearProgram::new(dim + 1);
    let mut strict = false;
    for c in constraints {
        let mut a: Vec<Rational> = c.f.linear().to_vec();
        a.push(Rational::zero());
        let b = -c.f.constant_term();
        match c.rel {
            Rel::Eq => lp.row(a, RowKind::Eq, b),
            Rel::Ge => lp.row(a, RowKind::Ge, b),
            Rel::Gt => {
                strict = true;
                a[dim] = -Rational::one();
                lp.row(a, RowKind::Ge, b);
            }
        }
    }
    let mut cap = vec![Rational::zero(); dim + 1];
    cap[dim] = Rational::one();
    lp.row(cap, RowKind::Le, Rational::one());
    lp.objective[dim] = -Rational::one();
    match lp.solve() {
        LpOutcome::Optimal { value, mut x } if !strict || value.is_negative() => {
            x.pop();
            Some(x)
        }
        _ => None,
    }
}

/// Every sign vector of `planes` realised by some point of `R^dim`, in
/// lexicographic order `-` < `=` < `+`.
pub fn realizable_sign_vectors(
    dim: usize,
    planes: &[AffineFunctional],
) -> Vec<(Vec<Sign>, Vec<Rational>)> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    let mut cons = Vec::new();
    fn rec(
        dim: usize,
        planes: &[AffineFunctional],
        prefix: &mut Vec<Sign>,
        cons: &mut Vec<Constraint>,
        out: &mut Vec<(Vec<Sign>, Vec<Rational>)>,
    ) {
        let Some(witness) = feasible_point(dim, cons) else {
            return;
        };
        if prefix.len() == planes.len() {
            out.push((prefix.clone(), witness));
            return;
        }
        let h = &planes[prefix.len()];
        for s in [Sign::Neg, Sign::Zero, Sign::Pos] {
            prefix.push(s);
            cons.push(Constraint::side(h, s));
            rec(dim, planes, prefix, cons, out);
            cons.pop();
            prefix.pop();
        }
    }
    rec(dim, planes, &mut prefix, &mut cons, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Eq,
    Ge,
}

/// Result of a linear program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

/// `minimise c·x` subject to rows `a·x (≤|=|≥) b`, all variables free.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub n: usize,
    pub objective: Vec<Rational>,
    pub rows: Vec<(Vec<Rational>, RowKind, Rational)>,
}

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        LinearProgram {
            n,
            objective: vec![Rational::zero(); n],
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, a: Vec<Rational>, kind: RowKind, b: Rational) {
        assert_eq!(a.len(), self.n);
        self.rows.push((a, kind, b));
    }

    /// Add the constraint `f rel 0` over the first `f.dim()` variables.
    pub fn constraint(&mut self, c: &Constraint) {
        let mut a = vec![Rational::zero(); self.n];
        for (i, v) in c.f.linear().iter().enumerate() {
            a[i] = v.clone();
        }
        let b = -c.f.constant_term();
        let kind = match c.rel {
            Rel::Eq => RowKind::Eq,
            Rel::Ge | Rel::Gt => RowKind::Ge,
        };
        self.row(a, kind, b);
    }

    pub fn solve(&self) -> LpOutcome {
        // Standard form: y = (x+, x-, slacks) ≥ 0, rows with b ≥ 0.
        let n = self.n;
        let slack_count = self.rows.iter().filter(|r| r.1 != RowKind::Eq).count();
        let cols = 2 * n + slack_count;
        let mut a: Vec<Vec<Rational>> = Vec::with_capacity(self.rows.len());
        let mut b: Vec<Rational> = Vec::with_capacity(self.rows.len());
        let mut s = 0;
        for (coef, kind, rhs) in &self.rows {
            let mut row = vec![Rational::zero(); cols];
            for (j, v) in coef.iter().enumerate() {
                row[j] = v.clone();
                row[n + j] = -v;
            }
            match kind {
                RowKind::Le => {
                    row[2 * n + s] = Rational::one();
                    s += 1;
                }
                RowKind::Ge => {
                    row[2 * n + s] = -Rational::one();
                    s += 1;
                }
                RowKind::Eq => {}
            }
            let mut rhs = rhs.clone();
            if rhs.is_negative() {
                row.iter_mut().for_each(|v| *v = -&*v);
                rhs = -rhs;
            }
            a.push(row);
            b.push(rhs);
        }
        let mut cost = vec![Rational::zero(); cols];
        for (j, c) in self.objective.iter().enumerate() {
            cost[j] = c.clone();
            cost[n + j] = -c;
        }
        match simplex(a, b, cost) {
            Simplex::Optimal(value, y) => {
                let x = (0..n).map(|j| &y[j] - &y[n + j]).collect();
                LpOutcome::Optimal { value, x }
            }
            Simplex::Infeasible => LpOutcome::Infeasible,
            Simplex::Unbounded => LpOutcome::Unbounded,
        }
    }
}

enum Simplex {
    Optimal(Rational, Vec<Rational>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// Rows of `[coefficients | rhs]`.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v = &*v * &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = &*v - &(&f * pv);
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimise `cost` over columns `< allowed`; Bland's rule for both choices.
    fn optimise(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            let reduced = |j: usize, t: &Tableau| {
                let mut r = cost[j].clone();
                for (i, &bj) in t.basis.iter().enumerate() {
                    if !t.rows[i][j].is_zero() && !cost[bj].is_zero() {
                        r -= &cost[bj] * &t.rows[i][j];
                    }
                }
                r
            };
            let Some(enter) =
                (0..allowed).find(|&j| !self.basis.contains(&j) && reduced(j, self).is_negative())
            else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[enter].is_positive() {
                    let ratio = &row[self.width] / &row[enter];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr || (ratio == lr && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }

    fn value(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .zip(&self.rows)
            .map(|(&j, row)| &cost[j] * &row[self.width])
            .sum()
    }
}

fn simplex(a: Vec<Vec<Rational>>, b: Vec<Rational>, cost: Vec<Rational>) -> Simplex {
    let m = a.len();
    let cols = cost.len();
    if m == 0 {
        return if cost.iter().any(Rational::is_negative) {
            Simplex::Unbounded
        } else {
            Simplex::Optimal(Rational::zero(), vec![Rational::zero(); cols])
        };
    }
    // Phase 1 with one artificial per row.
    let width = cols + m;
    let rows = a
        .into_iter()
        .zip(b)
        .enumerate()
        .map(|(i, (mut row, rhs))| {
            row.extend((0..m).map(|k| {
                if k == i {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            row.push(rhs);
            row
        })
        .collect();
    let mut t = Tableau {
        rows,
        basis: (cols..width).collect(),
        width,
    };
    let mut phase1 = vec![Rational::zero(); width];
    for c in phase1.iter_mut().skip(cols) {
        *c = Rational::one();
    }
    t.optimise(&phase1, width);
    if t.value(&phase1).is_positive() {
        return Simplex::Infeasible;
    }
    // Drive artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= cols {
            match (0..cols).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    let mut phase2 = cost.clone();
    phase2.extend((0..m).map(|_| Rational::zero()));
    if !t.optimise(&phase2, cols) {
        return Simplex::Unbounded;
    }
    let mut y = vec![Rational::zero(); cols];
    for (r, &j) in t.basis.iter().enumerate() {
        if j < cols {
            y[j] = t.rows[r][width].clone();
        }
    }
    Simplex::Optimal(t.value(&phase2), y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn af(c: &[i64]) -> AffineFunctional {
        AffineFunctional::new(c.iter().map(|v| Rational::from_int(*v)).collect())
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn strictness_matters() {
        // x > 0 and x < 0 is infeasible; x ≥ 0 and x ≤ 0 is the point 0.
        assert!(!is_feasible(
            1,
            &[
                Constraint::new(af(&[0, 1]), Rel::Gt),
                Constraint::new(af(&[0, -1]), Rel::Gt)
            ]
        ));
        let p = feasible_point(
            1,
            &[
                Constraint::new(af(&[0, 1]), Rel::Ge),
                Constraint::new(af(&[0, -1]), Rel::Ge),
            ],
        );
        assert_eq!(p, Some(vec![Rational::zero()]));
        // 0 < x < y < 1 has witnesses.
        let cs = [
            Constraint::new(af(&[0, 1, 0]), Rel::Gt),
            Constraint::new(af(&[0, -1, 1]), Rel::Gt),
            Constraint::new(af(&[1, 0, -1]), Rel::Gt),
        ];
        let p = feasible_point(2, &cs).unwrap();
        assert!(cs.iter().all(|c| c.holds(&p)));
        // With x + y = 2 added it is infeasible.
        let mut more = cs.to_vec();
        more.push(Constraint::new(af(&[-2, 1, 1]), Rel::Eq));
        assert!(!is_feasible(2, &more));
    }

    #[test]
    fn lp_route_agrees_on_strictness() {
        let open = [
            Constraint::new(af(&[0, 1, 0]), Rel::Gt),
            Constraint::new(af(&[0, -1, 1]), Rel::Gt),
            Constraint::new(af(&[1, 0, -1]), Rel::Gt),
        ];
        let p = lp_feasible_point(2, &open).unwrap();
        assert!(open.iter().all(|c| c.holds(&p)));
        assert!(lp_feasible_point(
            1,
            &[
                Constraint::new(af(&[0, 1]), Rel::Gt),
                Constraint::new(af(&[0, -1]), Rel::Ge)
            ]
        )
        .is_none());
        assert_eq!(
            lp_feasible_point(1, &[Constraint::new(af(&[-3, 1]), Rel::Eq)]),
            Some(vec![q(3, 1)])
        );
    }

    #[test]
    fn face_counts() {
        let faces = realizable_sign_vectors(2, &[af(&[0, 1, 0]), af(&[0, 0, 1])]);
        assert_eq!(faces.len(), 9);
        let faces = realizable_sign_vectors(2, &[af(&[0, 1, -1]), af(&[0, 1, 1]), af(&[-1, 1, 0])]);
        // Three lines in general position: 7 regions, 9 edges, 3 vertices.
        assert_eq!(faces.len(), 19);
    }

    #[test]
    fn simplex_basics() {
        // min x + y  s.t. x ≥ 1, y ≥ 2, x + y ≤ 10
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![q(1, 1), q(1, 1)];
        lp.row(vec![q(1, 1), q(0, 1)], RowKind::Ge, q(1, 1));
        lp.row(vec![q(0, 1), q(1, 1)], RowKind::Ge, q(2, 1));
        lp.row(vec![q(1, 1), q(1, 1)], RowKind::Le, q(10, 1));
        assert_eq!(
            lp.solve(),
            LpOutcome::Optimal {
                value: q(3, 1),
                x: vec![q(1, 1), q(2, 1)]
            }
        );
        // min -x unbounded over x ≥ 0.
        let mut lp = LinearProgram::new(1);
        lp.objective = vec![q(-1, 1)];
        lp.row(vec![q(1, 1)], RowKind::Ge, q(0, 1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
        // x ≤ 0 and x ≥ 1 infeasible.
        let mut lp = LinearProgram::new(1);
        lp.row(vec![q(1, 1)], RowKind::Le, q(0, 1));
        lp.row(vec![q(1, 1)], RowKind::Ge, q(1, 1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);
        // min |x - 7/2| via t ≥ x - 7/2, t ≥ 7/2 - x, with x = 2y exactly.
        let mut lp = LinearProgram::new(3);
        lp.objective = vec![q(0, 1), q(0, 1), q(1, 1)];
        lp.row(vec![q(-1, 1), q(0, 1), q(1, 1)], RowKind::Ge, q(-7, 2));
        lp.row(vec![q(1, 1), q(0, 1), q(1, 1)], RowKind::Ge, q(7, 2));
        lp.row(vec![q(1, 1), q(-2, 1), q(0, 1)], RowKind::Eq, q(0, 1));
        match lp.solve() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, q(0, 1));
                assert_eq!(x[0], q(7, 2));
            }
            other => panic!("{other:?}"),
        }
    }
}
