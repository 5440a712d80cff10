//! Cylindrical decomposition by vertical decomposition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{project_arrangement, Arrangement, GeometryError, Hyperplane};
use crate::affine::Sign;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Origin,
    Section,
    Sector,
}

/// A cell at some level `i`. Bounds index the level-`i` pool; `None` is `∓∞`.
/// A section has `lower == upper`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub level: usize,
    pub kind: CellKind,
    pub base: Option<usize>,
    pub lower: Option<usize>,
    pub upper: Option<usize>,
    pub sample: Vec<Rational>,
    /// Index range of the stack above this cell in the next level; `None`
    /// for top-level cells and cells outside the decomposed region.
    pub children: Option<(usize, usize)>,
}

impl Cell {
    pub fn is_section(&self) -> bool {
        self.kind == CellKind::Section
    }

    pub fn is_sector(&self) -> bool {
        self.kind == CellKind::Sector
    }
}

#[derive(Debug, Clone)]
pub struct CellDecomposition {
    dim: usize,
    /// `pools[i]` is the arrangement in `R^i` whose sections build level `i`.
    pools: Vec<Arrangement>,
    levels: Vec<Vec<Cell>>,
    region: Option<Vec<(Rational, Rational)>>,
}

impl CellDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pool(&self, level: usize) -> &Arrangement {
        &self.pools[level]
    }

    pub fn cells(&self, level: usize) -> &[Cell] {
        &self.levels[level]
    }

    pub fn cell(&self, level: usize, index: usize) -> &Cell {
        &self.levels[level][index]
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// The region (closed box on leading coordinates) the decomposition was
    /// restricted to, if any.
    pub fn region(&self) -> Option<&[(Rational, Rational)]> {
        self.region.as_deref()
    }

    /// Ancestor of `(level, index)` at level `target ≤ level`.
    pub fn ancestor(&self, level: usize, index: usize, target: usize) -> usize {
        let mut idx = index;
        for l in (target + 1..=level).rev() {
            idx = self.levels[l][idx]
                .base
                .expect("non-origin cell has a base");
        }
        idx
    }

    /// Value of the bound `b` of a level-`level` cell above `prefix`.
    fn bound_value(&self, level: usize, b: Option<usize>, prefix: &[Rational]) -> Option<Rational> {
        b.map(|i| self.pools[level].get(i).section_value(prefix))
    }

    /// True when `x` (of length at least `level`) lies in the cell.
    pub fn contains(&self, level: usize, index: usize, x: &[Rational]) -> bool {
        let mut idx = index;
        for l in (1..=level).rev() {
            let c = &self.levels[l][idx];
            let prefix = &x[..l - 1];
            let v = &x[l - 1];
            let lo = self.bound_value(l, c.lower, prefix);
            let hi = self.bound_value(l, c.upper, prefix);
            let ok = match c.kind {
                CellKind::Section => lo.as_ref() == Some(v),
                _ => lo.map_or(true, |lo| lo < *v) && hi.map_or(true, |hi| *v < hi),
            };
            if !ok {
                return false;
            }
            idx = c.base.unwrap();
        }
        true
    }

    /// The cells containing `x`, one per level, or `None` past a cell whose
    /// stack was not built.
    pub fn locate(&self, x: &[Rational]) -> Vec<usize> {
        let mut path = vec![0];
        for l in 1..=x.len().min(self.dim) {
            let parent = &self.levels[l - 1][*path.last().unwrap()];
            let Some((s, e)) = parent.children else { break };
            match (s..e).find(|&c| self.contains_step(l, c, x)) {
                Some(c) => path.push(c),
                None => break,
            }
        }
        path
    }

    /// Membership of `x` in the cylinder slice of a cell, ignoring the base.
    fn contains_step(&self, level: usize, index: usize, x: &[Rational]) -> bool {
        let c = &self.levels[level][index];
        let prefix = &x[..level - 1];
        let v = &x[level - 1];
        let lo = self.bound_value(level, c.lower, prefix);
        let hi = self.bound_value(level, c.upper, prefix);
        match c.kind {
            CellKind::Section => lo.as_ref() == Some(v),
            _ => lo.map_or(true, |lo| lo < *v) && hi.map_or(true, |hi| *v < hi),
        }
    }

    /// A random point of the cell's relative interior, drawn recursively.
    pub fn random_interior_point(
        &self,
        level: usize,
        index: usize,
        rng: &mut impl Rng,
    ) -> Vec<Rational> {
        if level == 0 {
            return Vec::new();
        }
        let c = &self.levels[level][index];
        let mut p = self.random_interior_point(level - 1, c.base.unwrap(), rng);
        let lo = self.bound_value(level, c.lower, &p);
        let hi = self.bound_value(level, c.upper, &p);
        let step = |rng: &mut dyn rand::RngCore| Rational::new(rng.gen_range(1..=16), 4);
        let v = match (c.kind, lo, hi) {
            (CellKind::Section, Some(v), _) => v,
            (_, Some(lo), Some(hi)) => {
                let t = Rational::new(rng.gen_range(1..32), 32);
                &lo + &(&(&hi - &lo) * &t)
            }
            (_, Some(lo), None) => &lo + &step(rng),
            (_, None, Some(hi)) => &hi - &step(rng),
            (_, None, None) => Rational::new(rng.gen_range(-32..=32), 4),
        };
        p.push(v);
        p
    }

    /// Sample points of every cell at `level`.
    pub fn samples(&self, level: usize) -> impl Iterator<Item = &[Rational]> {
        self.levels[level].iter().map(|c| c.sample.as_slice())
    }
}

/// Projection pools `A_1..A_d`, optionally dropping planes of levels below `d`
/// that miss the closed box `region` on the coordinates they involve.
fn projection_pools(
    arr: &Arrangement,
    region: Option<&[(Rational, Rational)]>,
) -> Vec<Arrangement> {
    let d = arr.dim();
    let mut pools = vec![Arrangement::new(0); d + 1];
    pools[d] = arr.clone();
    for i in (1..d).rev() {
        let projected = project_arrangement(&pools[i + 1]);
        pools[i] = match region {
            Some(r) if i <= r.len() => {
                let kept = projected.iter().filter(|h| {
                    let (lo, hi) = h.range_over(&r[..i]);
                    !lo.is_positive() && !hi.is_negative()
                });
                Arrangement::from_planes(i, kept.cloned()).unwrap()
            }
            _ => projected,
        };
    }
    pools
}

/// The stack above a cell with sample `base_sample`, built from `pool`.
fn stack(level: usize, base: usize, base_sample: &[Rational], pool: &Arrangement) -> Vec<Cell> {
    let mut values: Vec<(Rational, usize)> = pool
        .iter()
        .enumerate()
        .filter(|(_, h)| !h.is_vertical())
        .map(|(i, h)| (h.section_value(base_sample), i))
        .collect();
    values.sort();
    values.dedup_by(|b, a| a.0 == b.0);
    let with = |v: Rational| {
        let mut s = base_sample.to_vec();
        s.push(v);
        s
    };
    let cell = |kind, lower, upper, v| Cell {
        level,
        kind,
        base: Some(base),
        lower,
        upper,
        sample: with(v),
        children: None,
    };
    let mut out = Vec::with_capacity(2 * values.len() + 1);
    if values.is_empty() {
        out.push(cell(CellKind::Sector, None, None, Rational::zero()));
        return out;
    }
    out.push(cell(
        CellKind::Sector,
        None,
        Some(values[0].1),
        &values[0].0 - &Rational::one(),
    ));
    for (k, (v, i)) in values.iter().enumerate() {
        out.push(cell(CellKind::Section, Some(*i), Some(*i), v.clone()));
        match values.get(k + 1) {
            Some((w, j)) => {
                let mid = &(v + w) / &Rational::from_int(2);
                out.push(cell(CellKind::Sector, Some(*i), Some(*j), mid));
            }
            None => out.push(cell(CellKind::Sector, Some(*i), None, v + &Rational::one())),
        }
    }
    out
}

fn build(arr: &Arrangement, region: Option<Vec<(Rational, Rational)>>) -> CellDecomposition {
    let d = arr.dim();
    assert!(d >= 1, "decomposition needs dimension at least 1");
    let pools = projection_pools(arr, region.as_deref());
    let origin = Cell {
        level: 0,
        kind: CellKind::Origin,
        base: None,
        lower: None,
        upper: None,
        sample: Vec::new(),
        children: None,
    };
    let mut levels: Vec<Vec<Cell>> = vec![vec![origin]];
    for level in 1..=d {
        let prev = &levels[level - 1];
        let expand = |c: &Cell| match &region {
            Some(r) if c.level >= 1 && c.level <= r.len() => {
                let v = &c.sample[c.level - 1];
                let (lo, hi) = &r[c.level - 1];
                lo <= v && v <= hi
            }
            _ => true,
        };
        let stacks: Vec<Option<Vec<Cell>>> = prev
            .par_iter()
            .enumerate()
            .map(|(i, c)| expand(c).then(|| stack(level, i, &c.sample, &pools[level])))
            .collect();
        let mut next = Vec::new();
        let mut ranges = Vec::with_capacity(stacks.len());
        for s in stacks {
            match s {
                Some(s) => {
                    let start = next.len();
                    next.extend(s);
                    ranges.push(Some((start, next.len())));
                }
                None => ranges.push(None),
            }
        }
        for (c, r) in levels[level - 1].iter_mut().zip(ranges) {
            c.children = r;
        }
        levels.push(next);
    }
    CellDecomposition {
        dim: d,
        pools,
        levels,
        region,
    }
}

/// A cylindrical decomposition of `R^d` compatible with `arr`.
pub fn build_cd(arr: &Arrangement) -> CellDecomposition {
    build(arr, None)
}

/// A decomposition that is only refined inside the closed box `region` over the
/// leading `region.len()` coordinates. The planes `x_i = lo_i` and `x_i = hi_i`
/// must be part of `arr` so every cell is either inside or outside the box;
/// cells outside keep `children == None`.
pub fn build_cd_in_region(arr: &Arrangement, region: &[(Rational, Rational)]) -> CellDecomposition {
    assert!(region.len() <= arr.dim());
    build(arr, Some(region.to_vec()))
}

/// Side of the cell `(level, index)` relative to a plane of the level's pool.
pub fn cell_side(
    cd: &CellDecomposition,
    level: usize,
    index: usize,
    h: &Hyperplane,
) -> Result<Sign, GeometryError> {
    if !cd.pool(level).contains(h) {
        return Err(GeometryError::NotInPool(h.to_string(), level));
    }
    let c = cd
        .levels
        .get(level)
        .and_then(|l| l.get(index))
        .ok_or(GeometryError::NoSuchCell { level, index })?;
    Ok(h.side(&c.sample))
}

/// Identifier string of corner `mask`: bit `j` set means the upper bound (`⊣`)
/// was taken at coordinate `j`.
pub fn corner_id(mask: usize, level: usize) -> String {
    (0..level)
        .map(|j| if mask >> j & 1 == 1 { '⊣' } else { '⊢' })
        .collect()
}

/// The `2^level` corners of a bounded cell, indexed by identifier mask (see
/// [`corner_id`]). Distinct identifiers may name the same point.
pub fn cell_corners(
    cd: &CellDecomposition,
    level: usize,
    index: usize,
) -> Result<Vec<Vec<Rational>>, GeometryError> {
    if level == 0 {
        return Ok(vec![Vec::new()]);
    }
    let c = cd
        .levels
        .get(level)
        .and_then(|l| l.get(index))
        .ok_or(GeometryError::NoSuchCell { level, index })?;
    let (Some(lo), Some(hi)) = (c.lower, c.upper) else {
        return Err(GeometryError::Unbounded);
    };
    let base = cell_corners(cd, level - 1, c.base.unwrap())?;
    let (lo, hi) = (cd.pool(level).get(lo), cd.pool(level).get(hi));
    let mut out = Vec::with_capacity(base.len() * 2);
    for (plane, _) in [(lo, 0), (hi, 1)] {
        for p in &base {
            let mut q = p.clone();
            q.push(plane.section_value(p));
            out.push(q);
        }
    }
    Ok(out)
}

/// Checks that every top-level cell has constant sign against every plane of
/// `arr` (sample plus five random interior points) and that 100 random points
/// are each located in exactly one cell per level. Cells outside a restricted
/// region are skipped.
pub fn compatibility_check(cd: &CellDecomposition, arr: &Arrangement) -> bool {
    if arr.dim() != cd.dim() {
        return false;
    }
    let d = cd.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for (i, c) in cd.cells(d).iter().enumerate() {
        let points: Vec<Vec<Rational>> = std::iter::once(c.sample.clone())
            .chain((0..5).map(|_| cd.random_interior_point(d, i, &mut rng)))
            .collect();
        for h in arr.iter() {
            let s = h.side(&points[0]);
            if points[1..].iter().any(|p| h.side(p) != s) {
                return false;
            }
        }
    }
    for _ in 0..100 {
        let x: Vec<Rational> = (0..d)
            .map(|_| Rational::new(rng.gen_range(-80..=80), rng.gen_range(1..=8)))
            .collect();
        if let Some(r) = cd.region() {
            if x.iter().zip(r).any(|(v, (lo, hi))| v < lo || v > hi) {
                continue;
            }
        }
        let mut parent = 0;
        for level in 1..=d {
            let Some((s, e)) = cd.cell(level - 1, parent).children else {
                return false;
            };
            let hits: Vec<usize> = (s..e).filter(|&c| cd.contains_step(level, c, &x)).collect();
            if hits.len() != 1 {
                return false;
            }
            parent = hits[0];
        }
    }
    true
}
