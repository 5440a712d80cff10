//! Robustness, counterfactual explanations and feature contributions.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{all_sectors, AnalysisError, InputBox};
use crate::affine::Sign;
use crate::linear::{LinearProgram, LpOutcome, RowKind};
use crate::pwl::{breakpoints_1d, pwl_eval, pwl_localize, pwl_restrict, PwlFunction};
use crate::query::{
    evaluate_query_pwl, evaluate_with_cd, normalize_ordered_prenex, parse_query, QueryAnswer,
};
use crate::geometry::CellDecomposition;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Linf,
    L1,
}

impl Metric {
    fn function(self) -> &'static str {
        match self {
            Metric::Linf => "dist_linf",
            Metric::L1 => "dist_l1",
        }
    }

    pub fn distance(self, x: &[Rational], y: &[Rational]) -> Rational {
        let d = x.iter().zip(y).map(|(a, b)| (a - b).abs());
        match self {
            Metric::Linf => d.fold(Rational::zero(), Rational::max),
            Metric::L1 => d.sum(),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linf" => Ok(Metric::Linf),
            "l1" => Ok(Metric::L1),
            other => Err(format!("unknown metric `{other}` (expected linf or l1)")),
        }
    }
}

fn vars(stem: &str, m: usize) -> Vec<String> {
    (0..m).map(|i| format!("{stem}{i}")).collect()
}

fn positive(name: &'static str, v: &Rational) -> Result<(), AnalysisError> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(AnalysisError::NonPositive(name))
    }
}

/// Whether `|F(x) - F(a)| < delta` for every `x` with `d(x, a) < eps`,
/// decided as a closed query with `F(a)` passed as a constant.
pub fn robustness_check(
    f: &PwlFunction,
    a: &[Rational],
    eps: &Rational,
    delta: &Rational,
    metric: Metric,
) -> Result<bool, AnalysisError> {
    let m = f.inputs();
    if a.len() != m {
        return Err(AnalysisError::Dimension { expected: m, found: a.len() });
    }
    positive("eps", eps)?;
    positive("delta", delta)?;
    let xs = vars("x", m);
    let ps = vars("a", m);
    let text = format!(
        "forall {} . ({}([{}], [{}]) < eps -> abs(F({}) - fa) < delta)",
        xs.join(", "),
        metric.function(),
        xs.join(", "),
        ps.join(", "),
        xs.join(", "),
    );
    let mut params: BTreeMap<String, Rational> = ps.into_iter().zip(a.iter().cloned()).collect();
    params.insert("eps".into(), eps.clone());
    params.insert("delta".into(), delta.clone());
    params.insert("fa".into(), pwl_eval(f, a)?);
    // The ball lies in the open box of radius eps around a under both metrics.
    let region: Vec<(Rational, Rational)> = a.iter().map(|ai| (ai - eps, ai + eps)).collect();
    let local = pwl_localize(f, &region)?;
    match evaluate_query_pwl(&local, &text, &params, &[])? {
        QueryAnswer::Closed(b) => Ok(b),
        QueryAnswer::Open { .. } => unreachable!("sentence has no free variables"),
    }
}

/// Closest input to `a` whose output exceeds the threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterfactual {
    /// Minimiser over the closure of the region `F(x) > threshold`.
    pub witness: Vec<Rational>,
    pub distance: Rational,
    /// Whether `F(witness) > threshold` holds; otherwise the distance is an
    /// infimum approached from inside the region.
    pub attained: bool,
    /// A point strictly inside the region near the witness.
    pub interior: Vec<Rational>,
}

/// Closure constraints `(coeffs over x, constant, kind)` of a cell at level `m`.
fn cell_rows(cd: &CellDecomposition, m: usize, idx: usize) -> Vec<(Vec<Rational>, Rational, RowKind)> {
    let mut rows = Vec::new();
    for l in 1..=m {
        let c = cd.cell(l, cd.ancestor(m, idx, l));
        let pool = cd.pool(l);
        let mut add = |p: usize| {
            let h = pool.get(p).functional();
            let mut coeffs = h.linear().to_vec();
            coeffs.resize(m, Rational::zero());
            let k = h.constant_term().clone();
            match Sign::of(&h.eval(&c.sample)) {
                Sign::Zero => rows.push((coeffs, k, RowKind::Eq)),
                Sign::Pos => rows.push((coeffs, k, RowKind::Ge)),
                Sign::Neg => rows.push((coeffs, k, RowKind::Le)),
            }
        };
        if c.is_section() {
            add(c.lower.expect("section has a plane"));
        } else {
            c.lower.into_iter().chain(c.upper).for_each(&mut add);
        }
    }
    rows
}

/// A point of the open cell (given by its closure rows) strictly inside the
/// box, found by maximising a common slack.
fn point_in_open_box(rows: &[(Vec<Rational>, Rational, RowKind)], b: &InputBox) -> Option<Vec<Rational>> {
    let m = b.dim();
    let n = m + 1;
    let mut lp = LinearProgram::new(n);
    let with_slack = |c: &[Rational], t: i64| {
        let mut v = c.to_vec();
        v.resize(m, Rational::zero());
        v.push(Rational::from_int(t));
        v
    };
    for (c, k, kind) in rows {
        match kind {
            RowKind::Ge => lp.row(with_slack(c, -1), RowKind::Ge, -k),
            RowKind::Le => lp.row(with_slack(c, 1), RowKind::Le, -k),
            RowKind::Eq => return None,
        }
    }
    for (i, (lo, hi)) in b.bounds().iter().enumerate() {
        let mut e = vec![Rational::zero(); m];
        e[i] = Rational::one();
        lp.row(with_slack(&e, -1), RowKind::Ge, lo.clone());
        lp.row(with_slack(&e, 1), RowKind::Le, hi.clone());
    }
    let mut cap = vec![Rational::zero(); n];
    cap[m] = Rational::one();
    lp.row(cap, RowKind::Le, Rational::one());
    lp.objective[m] = -Rational::one();
    match lp.solve() {
        LpOutcome::Optimal { value, mut x } if value.is_negative() => {
            x.truncate(m);
            Some(x)
        }
        _ => None,
    }
}

/// Distance LP over `x` and auxiliary variables; returns the program with the
/// distance as objective.
fn distance_program(
    m: usize,
    a: &[Rational],
    metric: Metric,
    rows: &[(Vec<Rational>, Rational, RowKind)],
    bbox: Option<&InputBox>,
) -> LinearProgram {
    let aux = match metric {
        Metric::Linf => 1,
        Metric::L1 => m,
    };
    let n = m + aux;
    let mut lp = LinearProgram::new(n);
    let pad = |c: &[Rational]| {
        let mut v = c.to_vec();
        v.resize(n, Rational::zero());
        v
    };
    for (c, k, kind) in rows {
        lp.row(pad(c), *kind, -k);
    }
    if let Some(b) = bbox {
        for (i, (lo, hi)) in b.bounds().iter().enumerate() {
            let mut e = vec![Rational::zero(); n];
            e[i] = Rational::one();
            lp.row(e.clone(), RowKind::Ge, lo.clone());
            lp.row(e, RowKind::Le, hi.clone());
        }
    }
    for i in 0..m {
        let t = match metric {
            Metric::Linf => m,
            Metric::L1 => m + i,
        };
        for s in [Rational::one(), -Rational::one()] {
            let mut e = vec![Rational::zero(); n];
            e[t] = Rational::one();
            e[i] = -&s;
            lp.row(e, RowKind::Ge, -(&s * &a[i]));
        }
    }
    for t in m..n {
        lp.objective[t] = Rational::one();
    }
    lp
}

fn minimise(lp: &LinearProgram) -> Option<(Rational, Vec<Rational>)> {
    match lp.solve() {
        LpOutcome::Optimal { value, x } => Some((value, x)),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("distances are bounded below"),
    }
}

/// Lexicographically smallest minimiser once the distance is pinned.
fn lexicographic_minimiser(mut lp: LinearProgram, m: usize, distance: &Rational) -> Vec<Rational> {
    let n = lp.n;
    let obj = std::mem::replace(&mut lp.objective, vec![Rational::zero(); n]);
    lp.row(obj, RowKind::Eq, distance.clone());
    let mut x = Vec::with_capacity(m);
    for i in 0..m {
        let mut e = vec![Rational::zero(); n];
        e[i] = Rational::one();
        lp.objective = e.clone();
        let (v, _) = minimise(&lp).expect("pinned program stays feasible");
        lp.row(e, RowKind::Eq, v.clone());
        x.push(v);
    }
    x
}

/// Closest point to `a` (under `metric`) where `F` exceeds `threshold`,
/// optionally restricted to `bbox`. Ties are broken towards the
/// lexicographically smallest witness.
pub fn counterfactual_explain(
    f: &PwlFunction,
    a: &[Rational],
    threshold: &Rational,
    metric: Metric,
    bbox: Option<&InputBox>,
) -> Result<Counterfactual, AnalysisError> {
    let m = f.inputs();
    if a.len() != m {
        return Err(AnalysisError::Dimension { expected: m, found: a.len() });
    }
    let inside = bbox.is_none_or(|b| b.contains(a));
    if inside && &pwl_eval(f, a)? > threshold {
        return Ok(Counterfactual {
            witness: a.to_vec(),
            distance: Rational::zero(),
            attained: true,
            interior: a.to_vec(),
        });
    }
    let xs = vars("x", m);
    let ast = parse_query(&format!("F({}) > t", xs.join(", ")), m)?;
    let params = BTreeMap::from([("t".to_string(), threshold.clone())]);
    let q = normalize_ordered_prenex(&ast, &params, &xs)?;
    let (_, _, cd) = evaluate_with_cd(Some(f), &q)?;
    let (cd, selected) = cd.expect("query has free variables");
    // The region is open, so its closure within the box is the union of the
    // closures of its full-dimensional cells that meet the open box.
    let cells: Vec<(usize, Vec<Rational>)> = selected
        .iter()
        .filter(|&c| all_sectors(&cd, m, c))
        .filter_map(|c| match bbox {
            None => Some((c, cd.cell(m, c).sample.clone())),
            Some(b) => point_in_open_box(&cell_rows(&cd, m, c), b).map(|p| (c, p)),
        })
        .collect();
    let mut best: Option<Rational> = None;
    for (c, _) in &cells {
        let lp = distance_program(m, a, metric, &cell_rows(&cd, m, *c), bbox);
        let Some((d, _)) = minimise(&lp) else { continue };
        if best.as_ref().is_none_or(|bd| &d < bd) {
            best = Some(d);
        }
    }
    let Some(distance) = best else {
        return Err(AnalysisError::NoCounterfactual);
    };
    // Every cell at the optimal distance competes on its lexicographic minimiser.
    let mut winner: Option<(Vec<Rational>, &[Rational])> = None;
    for (c, inner) in &cells {
        let lp = distance_program(m, a, metric, &cell_rows(&cd, m, *c), bbox);
        match minimise(&lp) {
            Some((d, _)) if d == distance => {
                let x = lexicographic_minimiser(lp, m, &distance);
                if winner.as_ref().is_none_or(|(w, _)| &x < w) {
                    winner = Some((x, inner));
                }
            }
            _ => {}
        }
    }
    let (witness, inner) = winner.expect("the optimal cell has a minimiser");
    let attained = &pwl_eval(f, &witness)? > threshold;
    let interior = if attained {
        witness.clone()
    } else {
        // The half-open segment from a closure point towards an interior point
        // of the cell (inside the box) stays in the cell, where F exceeds the
        // threshold.
        let step = Rational::new(1, 1024);
        witness.iter().zip(inner).map(|(w, s)| w + &(&(s - w) * &step)).collect()
    };
    Ok(Counterfactual {
        witness,
        distance,
        attained,
        interior,
    })
}

/// Infimum of the changes `r > 0` to feature `i` (0-based) that move the output
/// by more than `eps` in either direction, or `None` when no change does.
pub fn feature_contribution(
    f: &PwlFunction,
    a: &[Rational],
    i: usize,
    eps: &Rational,
) -> Result<Option<Rational>, AnalysisError> {
    let m = f.inputs();
    if a.len() != m {
        return Err(AnalysisError::Dimension { expected: m, found: a.len() });
    }
    if i >= m {
        return Err(AnalysisError::FeatureIndex(i));
    }
    positive("eps", eps)?;
    let fixed: BTreeMap<usize, Rational> = (0..m).filter(|&j| j != i).map(|j| (j, a[j].clone())).collect();
    let g = pwl_restrict(f, &fixed)?;
    let at = |t: &Rational| pwl_eval(&g, std::slice::from_ref(t));
    let base = at(&a[i])?;
    let mut radii: Vec<Rational> = breakpoints_1d(&g)
        .into_iter()
        .map(|b| (&b - &a[i]).abs())
        .filter(|r| r.is_positive())
        .collect();
    radii.push(Rational::zero());
    radii.sort();
    radii.dedup();
    let mut best: Option<Rational> = None;
    for dir in [Rational::one(), -Rational::one()] {
        // u(r) = g(a_i + dir r) - g(a_i) is linear between consecutive radii.
        let u = |r: &Rational| -> Result<Rational, AnalysisError> { Ok(at(&(&a[i] + &(&dir * r)))? - &base) };
        for (k, r0) in radii.iter().enumerate() {
            let u0 = u(r0)?;
            let r1 = radii.get(k + 1).cloned().unwrap_or_else(|| r0 + &Rational::one());
            let slope = (u(&r1)? - &u0) / (&r1 - r0);
            let unbounded = k + 1 == radii.len();
            // Infimum of the r in this piece with |u(r)| > eps.
            let hit = if u0.abs() > *eps {
                Some(r0.clone())
            } else if slope.is_zero() {
                None
            } else {
                let target = if slope.is_positive() { eps.clone() } else { -eps };
                let r = r0 + &((target - &u0) / &slope);
                (unbounded || r < r1).then_some(r)
            };
            if let Some(r) = hit {
                if best.as_ref().is_none_or(|b| &r < b) {
                    best = Some(r);
                }
                break;
            }
        }
    }
    Ok(best)
}
