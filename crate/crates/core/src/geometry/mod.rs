//! Hyperplane arrangements and their cylindrical decompositions.
//!
//! Hyperplanes are kept in a canonical integer form so that planes equal up to
//! a constant factor collapse to one entry. The projection phase eliminates
//! the last coordinate level by level; [`build_cd`] then stacks sections and
//! sectors from the origin upwards.

mod cd;

use std::fmt;

use indexmap::IndexSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::affine::{AffineFunctional, Sign};
use crate::rational::Rational;

pub use cd::{
    build_cd, build_cd_in_region, cell_corners, cell_side, compatibility_check, corner_id, Cell,
    CellDecomposition, CellKind,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("hyperplane has no nonzero variable coefficient")]
    Degenerate,
    #[error("hyperplane {0} is not in the decomposition's pool at level {1}")]
    NotInPool(String, usize),
    #[error("cell is unbounded")]
    Unbounded,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("no cell {index} at level {level}")]
    NoSuchCell { level: usize, index: usize },
}

/// An affine hyperplane `a0 + a1 x1 + ... + ad xd = 0` in canonical form:
/// integer coefficients with gcd 1 and first nonzero variable coefficient positive.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hyperplane(AffineFunctional);

impl Hyperplane {
    /// Canonical representative of `f = 0`.
    pub fn new(f: &AffineFunctional) -> Result<Hyperplane, GeometryError> {
        Self::with_orientation(f).map(|(h, _)| h)
    }

    /// Canonical representative together with the sign of `λ` in `f = λ·h`.
    pub fn with_orientation(f: &AffineFunctional) -> Result<(Hyperplane, Sign), GeometryError> {
        let Some(first) = f.linear().iter().find(|a| !a.is_zero()) else {
            return Err(GeometryError::Degenerate);
        };
        let orientation = Sign::of(first);
        let mut lcm = BigInt::one();
        for c in f.coeffs() {
            lcm = lcm.lcm(&c.denom());
        }
        let ints: Vec<BigInt> = f
            .coeffs()
            .iter()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        let mut g = BigInt::zero();
        for v in &ints {
            g = g.gcd(v);
        }
        if orientation == Sign::Neg {
            g = -g;
        }
        let coeffs = ints
            .into_iter()
            .map(|v| Rational::from_bigint(v / &g))
            .collect();
        Ok((Hyperplane(AffineFunctional::new(coeffs)), orientation))
    }

    pub fn from_ints(coeffs: &[i64]) -> Result<Hyperplane, GeometryError> {
        Self::new(&AffineFunctional::new(
            coeffs.iter().map(|c| Rational::from_int(*c)).collect(),
        ))
    }

    pub fn functional(&self) -> &AffineFunctional {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn coeffs(&self) -> &[Rational] {
        self.0.coeffs()
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.0.eval(x)
    }

    pub fn side(&self, x: &[Rational]) -> Sign {
        Sign::of(&self.0.eval(x))
    }

    /// True when the last coordinate does not occur.
    pub fn is_vertical(&self) -> bool {
        self.0.coeff(self.dim() - 1).is_zero()
    }

    /// The last coordinate of the plane above `prefix` (length `dim - 1`).
    /// Only meaningful for non-vertical planes.
    pub fn section_value(&self, prefix: &[Rational]) -> Rational {
        let last = self.0.coeff(self.dim() - 1);
        -(self.0.eval_prefix(prefix) / last)
    }

    /// The same plane read in `R^{d-1}`; only valid for vertical planes.
    pub fn drop_last(&self) -> Result<Hyperplane, GeometryError> {
        let c = self.coeffs();
        Hyperplane::new(&AffineFunctional::new(c[..c.len() - 1].to_vec()))
    }

    /// Smallest and largest value over the closed box `region` (one interval per coordinate).
    pub fn range_over(&self, region: &[(Rational, Rational)]) -> (Rational, Rational) {
        let mut lo = self.0.constant_term().clone();
        let mut hi = lo.clone();
        for (a, (l, u)) in self.0.linear().iter().zip(region) {
            if a.is_positive() {
                lo += a * l;
                hi += a * u;
            } else if a.is_negative() {
                lo += a * u;
                hi += a * l;
            }
        }
        (lo, hi)
    }
}

impl fmt::Debug for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = 0", self.0)
    }
}

impl fmt::Display for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = 0", self.0)
    }
}

/// A finite set of canonical hyperplanes in `R^dim`, in insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrangement {
    dim: usize,
    planes: IndexSet<Hyperplane>,
}

impl Arrangement {
    pub fn new(dim: usize) -> Self {
        Arrangement {
            dim,
            planes: IndexSet::new(),
        }
    }

    pub fn from_planes(
        dim: usize,
        planes: impl IntoIterator<Item = Hyperplane>,
    ) -> Result<Self, GeometryError> {
        let mut arr = Arrangement::new(dim);
        for h in planes {
            arr.insert(h)?;
        }
        Ok(arr)
    }

    /// Insert `h`, returning its index; duplicates keep their first index.
    pub fn insert(&mut self, h: Hyperplane) -> Result<usize, GeometryError> {
        if h.dim() != self.dim {
            return Err(GeometryError::Dimension {
                expected: self.dim,
                found: h.dim(),
            });
        }
        Ok(self.planes.insert_full(h).0)
    }

    /// Canonicalise `f` and insert it; constant functionals are ignored.
    pub fn insert_functional(
        &mut self,
        f: &AffineFunctional,
    ) -> Result<Option<usize>, GeometryError> {
        match Hyperplane::new(f) {
            Ok(h) => self.insert(h).map(Some),
            Err(GeometryError::Degenerate) => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn get(&self, i: usize) -> &Hyperplane {
        &self.planes[i]
    }

    pub fn index_of(&self, h: &Hyperplane) -> Option<usize> {
        self.planes.get_index_of(h)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Hyperplane> {
        self.planes.iter()
    }

    pub fn contains(&self, h: &Hyperplane) -> bool {
        self.planes.contains(h)
    }

    /// Sign of every plane at `x`.
    pub fn sign_vector(&self, x: &[Rational]) -> Vec<Sign> {
        self.planes.iter().map(|h| h.side(x)).collect()
    }
}

/// Project an arrangement in `R^i` to `R^{i-1}`: vertical planes are copied
/// with the last coordinate dropped, and every pair of non-vertical planes
/// contributes the projection of its intersection. Parallel pairs contribute
/// nothing.
pub fn project_arrangement(arr: &Arrangement) -> Arrangement {
    assert!(arr.dim() >= 2, "projection needs dimension at least 2");
    let i = arr.dim() - 1;
    let mut out = Arrangement::new(i);
    let mut slanted: Vec<&Hyperplane> = Vec::new();
    for h in arr.iter() {
        if h.is_vertical() {
            out.insert(h.drop_last().expect("vertical plane keeps a variable"))
                .unwrap();
        } else {
            slanted.push(h);
        }
    }
    for (k, h) in slanted.iter().enumerate() {
        for g in &slanted[k + 1..] {
            // a_g·h − a_h·g cancels the last coordinate.
            let e = h
                .functional()
                .scale(g.functional().coeff(i))
                .sub(&g.functional().scale(h.functional().coeff(i)));
            let reduced = AffineFunctional::new(e.coeffs()[..=i].to_vec());
            let _ = out.insert_functional(&reduced).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests;

/// Every sign vector realised by `planes` in `R^dim` with a witness point,
/// found by refining the face list one plane at a time. Sorted by sign vector.
///
/// Faces are relatively open and convex, so a plane that is nonzero at the
/// witness splits the face iff it takes the opposite sign somewhere on it, and
/// the zero piece then lies on the segment between the two witnesses. One
/// linear program per face and plane decides everything.
pub fn arrangement_faces(dim: usize, planes: &[Hyperplane]) -> Vec<(Vec<Sign>, Vec<Rational>)> {
    use crate::linear::{lp_feasible_point, Constraint};
    use rayon::prelude::*;
    let mut faces: Vec<(Vec<Sign>, Vec<Rational>)> =
        vec![(Vec::new(), vec![Rational::zero(); dim])];
    for (k, h) in planes.iter().enumerate() {
        let f = h.functional();
        let next: Vec<Vec<(Vec<Sign>, Vec<Rational>)>> = faces
            .par_iter()
            .map(|(signs, w)| {
                let here = h.side(w);
                let mut cons: Vec<Constraint> = signs
                    .iter()
                    .zip(&planes[..k])
                    .map(|(s, g)| Constraint::side(g.functional(), *s))
                    .collect();
                let push =
                    |out: &mut Vec<(Vec<Sign>, Vec<Rational>)>, s: Sign, p: Vec<Rational>| {
                        let mut sv = signs.clone();
                        sv.push(s);
                        out.push((sv, p));
                    };
                let mut out = Vec::with_capacity(3);
                let probe = if here == Sign::Zero {
                    Sign::Pos
                } else {
                    here.flip()
                };
                cons.push(Constraint::side(f, probe));
                let Some(p) = lp_feasible_point(dim, &cons) else {
                    push(&mut out, here, w.clone());
                    return out;
                };
                let (hw, hp) = (h.eval(w), h.eval(&p));
                let along = |t: &Rational| -> Vec<Rational> {
                    w.iter().zip(&p).map(|(a, b)| a + &(&(b - a) * t)).collect()
                };
                let mut pieces = if here == Sign::Zero {
                    // Step from w away from p until the face is left no further than needed.
                    let mut t = -Rational::one();
                    loop {
                        let q = along(&t);
                        if h.side(&q) == Sign::Neg
                            && signs
                                .iter()
                                .zip(&planes[..k])
                                .all(|(s, g)| g.side(&q) == *s)
                        {
                            break vec![(Sign::Neg, q), (Sign::Zero, w.clone()), (Sign::Pos, p)];
                        }
                        t = &t / &Rational::from_int(2);
                    }
                } else {
                    let lambda = &hw / &(&hw - &hp);
                    vec![(here, w.clone()), (Sign::Zero, along(&lambda)), (probe, p)]
                };
                pieces.sort_by_key(|(s, _)| *s);
                for (s, q) in pieces {
                    push(&mut out, s, q);
                }
                out
            })
            .collect();
        faces = next.into_iter().flatten().collect();
    }
    faces.sort();
    faces
}
