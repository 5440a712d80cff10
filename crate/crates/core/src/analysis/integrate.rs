//! Exact integration of piecewise-linear functions over boxes.
//!
//! In one dimension the integral is a sum of trapezoids between consecutive
//! breakpoints. In general the region between the graph and `y = 0` is cut by
//! a decomposition of `R^{m+1}`, and every full-dimensional cell in it is
//! triangulated from its corner identifiers.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::AnalysisError;
use crate::affine::{AffineFunctional, Sign};
use crate::linear::{lp_feasible_point, Constraint, Rel};
use crate::geometry::{build_cd_in_region, cell_corners, Arrangement, CellDecomposition};
use crate::pwl::{breakpoints_1d, pwl_eval, PwlFunction};
use crate::rational::{factorial, Rational};

/// Axis-parallel box `[a_1, b_1] × ... × [a_m, b_m]` with `a_i < b_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputBox {
    bounds: Vec<(Rational, Rational)>,
}

impl InputBox {
    pub fn new(bounds: Vec<(Rational, Rational)>) -> Result<Self, AnalysisError> {
        if let Some(i) = bounds.iter().position(|(a, b)| a >= b) {
            return Err(AnalysisError::EmptyBox(i));
        }
        Ok(InputBox { bounds })
    }

    /// The unit cube `[0, 1]^m`.
    pub fn unit(m: usize) -> Self {
        InputBox {
            bounds: vec![(Rational::zero(), Rational::one()); m],
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(Rational, Rational)] {
        &self.bounds
    }

    pub fn volume(&self) -> Rational {
        self.bounds.iter().map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim() && self.bounds.iter().zip(x).all(|((a, b), v)| a <= v && v <= b)
    }

    fn contains_strictly(&self, x: &[Rational]) -> bool {
        self.bounds.iter().zip(x).all(|((a, b), v)| a < v && v < b)
    }

    /// Box over the coordinates not in `fixed` (ascending order).
    pub fn without(&self, fixed: &[usize]) -> InputBox {
        InputBox {
            bounds: self
                .bounds
                .iter()
                .enumerate()
                .filter(|(i, _)| !fixed.contains(i))
                .map(|(_, b)| b.clone())
                .collect(),
        }
    }
}

/// Simplex given by its corner points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simplex {
    pub corners: Vec<Vec<Rational>>,
}

impl Simplex {
    pub fn level(&self) -> usize {
        self.corners.len() - 1
    }
}

fn check_dim(f: &PwlFunction, b: &InputBox) -> Result<(), AnalysisError> {
    if f.inputs() != b.dim() {
        return Err(AnalysisError::Dimension {
            expected: f.inputs(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Integral of `f` over `b`; one-dimensional inputs take the trapezoid route.
pub fn integrate_box(f: &PwlFunction, b: &InputBox) -> Result<Rational, AnalysisError> {
    check_dim(f, b)?;
    match f.inputs() {
        0 => Ok(pwl_eval(f, &[])?),
        1 => integrate_1d(f, &b.bounds[0].0, &b.bounds[0].1),
        _ => integrate_by_decomposition(f, b),
    }
}

/// Sum of trapezoids over the breakpoints inside `[a, b]`.
pub fn integrate_1d(f: &PwlFunction, a: &Rational, b: &Rational) -> Result<Rational, AnalysisError> {
    if f.inputs() != 1 {
        return Err(AnalysisError::Dimension {
            expected: 1,
            found: f.inputs(),
        });
    }
    let mut xs = vec![a.clone()];
    xs.extend(breakpoints_1d(f).into_iter().filter(|x| a < x && x < b));
    xs.push(b.clone());
    let ys = xs
        .iter()
        .map(|x| pwl_eval(f, std::slice::from_ref(x)))
        .collect::<Result<Vec<_>, _>>()?;
    let two = Rational::from_int(2);
    Ok(xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| &(&x[1] - &x[0]) * &(&(&y[0] + &y[1]) / &two))
        .sum())
}

/// Components of the full-dimensional polytopes that meet the open box.
fn components_in_box<'a>(f: &'a PwlFunction, b: &InputBox) -> Vec<&'a AffineFunctional> {
    let m = f.inputs();
    let mut walls = Vec::with_capacity(2 * m);
    for (i, (lo, hi)) in b.bounds.iter().enumerate() {
        let xi = AffineFunctional::coordinate(m, i);
        walls.push(Constraint::new(xi.add_constant(&-lo), Rel::Gt));
        walls.push(Constraint::new(xi.neg().add_constant(hi), Rel::Gt));
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for p in f.polytopes() {
        if p.position.contains(&Sign::Zero) || seen.contains(&p.component) {
            continue;
        }
        let mut rows = walls.clone();
        rows.extend(f.breakplanes().iter().zip(&p.position).map(|(h, &s)| Constraint::side(h.functional(), s)));
        if lp_feasible_point(m, &rows).is_some() {
            seen.insert(&p.component);
            out.push(&p.component);
        }
    }
    out
}

/// Arrangement in `R^{m+1}` of the breakplanes, the graphs of the components
/// that appear inside the box, the box faces and `y = 0`.
fn integration_arrangement(f: &PwlFunction, b: &InputBox) -> Result<Arrangement, AnalysisError> {
    let m = f.inputs();
    let n = m + 1;
    let lift: Vec<usize> = (0..m).collect();
    let mut arr = Arrangement::new(n);
    for h in f.breakplanes() {
        arr.insert_functional(&h.functional().embed(n, &lift))?;
    }
    for c in components_in_box(f, b) {
        arr.insert_functional(&c.embed(n, &lift).sub(&AffineFunctional::coordinate(n, m)))?;
    }
    for (i, (lo, hi)) in b.bounds.iter().enumerate() {
        let xi = AffineFunctional::coordinate(n, i);
        arr.insert_functional(&xi.add_constant(&-lo))?;
        arr.insert_functional(&xi.add_constant(&-hi))?;
    }
    arr.insert_functional(&AffineFunctional::coordinate(n, m))?;
    Ok(arr)
}

/// Whether the cell and all its ancestors are sectors.
pub fn all_sectors(cd: &CellDecomposition, level: usize, index: usize) -> bool {
    (1..=level).all(|l| {
        let i = cd.ancestor(level, index, l);
        cd.cell(l, i).is_sector()
    })
}

/// Integral through the decomposition route, for any input dimension.
pub fn integrate_by_decomposition(f: &PwlFunction, b: &InputBox) -> Result<Rational, AnalysisError> {
    check_dim(f, b)?;
    let m = f.inputs();
    let n = m + 1;
    let arr = integration_arrangement(f, b)?;
    let cd = build_cd_in_region(&arr, &b.bounds);
    let parts: Vec<Rational> = (0..cd.cells(n).len())
        .into_par_iter()
        .map(|c| -> Result<Rational, AnalysisError> {
            let s = &cd.cell(n, c).sample;
            if !b.contains_strictly(&s[..m]) || !all_sectors(&cd, n, c) {
                return Ok(Rational::zero());
            }
            let v = pwl_eval(f, &s[..m])?;
            let y = &s[m];
            let sign = match (Sign::of(&v), Sign::of(y)) {
                (Sign::Pos, Sign::Pos) if y < &v => Rational::one(),
                (Sign::Neg, Sign::Neg) if y > &v => -Rational::one(),
                _ => return Ok(Rational::zero()),
            };
            let vol: Rational = triangulate_cell(&cd, n, c)?.iter().map(simplex_volume).sum();
            Ok(sign * vol)
        })
        .collect::<Result<_, _>>()?;
    Ok(parts.into_iter().sum())
}

/// All sequences of `k` distinct indices from `0..n`.
fn sequences(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in 0..n {
            if !cur.contains(&j) {
                cur.push(j);
                go(n, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn mask_of(js: &[usize]) -> usize {
    js.iter().fold(0, |m, j| m | 1 << j)
}

/// Corner masks with every bit of `fixed` set.
fn corners_with(n: usize, fixed: usize) -> impl Iterator<Item = usize> {
    (0..1usize << n).filter(move |r| r & fixed == fixed)
}

/// Triangulation of a bounded full-dimensional cell. Corners are named by
/// masks (bit `j` set when coordinate `j` takes the upper section); the apex
/// of every face is its corner with the fewest upper choices, and a sequence
/// of facet choices `j_1..j_{n-1}` yields a simplex when each chosen facet
/// avoids the apex of its parent and the final edge is not a single point.
pub fn triangulate_cell(cd: &CellDecomposition, level: usize, index: usize) -> Result<Vec<Simplex>, AnalysisError> {
    if level == 0 {
        return Err(AnalysisError::NotFullDimensional);
    }
    if !all_sectors(cd, level, index) {
        return Err(AnalysisError::NotFullDimensional);
    }
    let corners = cell_corners(cd, level, index)?;
    let n = level;
    if n == 1 {
        return Ok(if corners[0] == corners[1] {
            Vec::new()
        } else {
            vec![Simplex { corners }]
        });
    }
    let mut out = Vec::new();
    for js in sequences(n, n - 1) {
        let last = mask_of(&js);
        let pair: Vec<usize> = corners_with(n, last).collect();
        if corners[pair[0]] == corners[pair[1]] {
            continue;
        }
        let avoids_apex = (1..=js.len()).all(|k| {
            let apex = mask_of(&js[..k - 1]);
            corners_with(n, mask_of(&js[..k])).all(|r| corners[r] != corners[apex])
        });
        if !avoids_apex {
            continue;
        }
        let mut ids = pair;
        for k in (1..n - 1).rev() {
            ids.push(mask_of(&js[..k]));
        }
        ids.push(0);
        let s = Simplex {
            corners: ids.iter().map(|&r| corners[r].clone()).collect(),
        };
        if !simplex_volume(&s).is_zero() {
            out.push(s);
        }
    }
    Ok(out)
}

/// Volume `|det(v_1 - v_{n+1}, ..., v_n - v_{n+1})| / n!`.
pub fn simplex_volume(s: &Simplex) -> Rational {
    let n = s.level();
    let last = &s.corners[n];
    assert!(s.corners.iter().all(|c| c.len() == n), "simplex corners must lie in R^n");
    let rows: Vec<Vec<Rational>> = s.corners[..n]
        .iter()
        .map(|v| v.iter().zip(last).map(|(a, b)| a - b).collect())
        .collect();
    determinant(rows).abs() / factorial(n)
}

/// Determinant by fraction-free (Bareiss) elimination after clearing
/// denominators row by row.
pub fn determinant(rows: Vec<Vec<Rational>>) -> Rational {
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, Zero};

    let n = rows.len();
    if n == 0 {
        return Rational::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(&v.denom()));
            scale *= &l;
            row.iter().map(|v| v.numer() * (&l / v.denom())).collect()
        })
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Rational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    Rational::from_big_parts(sign * &a[n - 1][n - 1], scale)
}
