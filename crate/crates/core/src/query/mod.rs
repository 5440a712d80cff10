//! Queries in linear real arithmetic with the network function `F`, decided
//! over a cylindrical decomposition compatible with the query's hyperplanes.
//!
//! A sentence is brought into ordered prenex form, the arrangement of the
//! piecewise-linear function's breakplanes and graphs under every index
//! context plus the query's own constraints is decomposed, top-level cells are
//! selected by the matrix, and quantifiers are removed from the innermost out
//! by projecting cell sets onto their bases.

mod normalize;
mod syntax;

use std::collections::BTreeMap;

use bitvec::prelude::*;
use rayon::prelude::*;

pub use normalize::{
    normalize_ordered_prenex, Matrix, NormalizeError, OrderedPrenexQuery, Quantifier,
};
pub use syntax::{parse_query, CmpRel, Expr, QueryAst, QueryParseError};

use crate::affine::{AffineFunctional, Sign};
use crate::geometry::{
    build_cd, Arrangement, CellDecomposition, GeometryError, Hyperplane,
};
use crate::network::{Network, NeuronId};
use crate::pwl::{pwl_from_network, PwlError, PwlFunction};
use crate::rational::Rational;

#[derive(Debug, thiserror::Error)]
pub enum QueryError {
    #[error(transparent)]
    Parse(#[from] QueryParseError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Pwl(#[from] PwlError),
    #[error("query uses F but no function was supplied")]
    MissingFunction,
    #[error("F has {expected} arguments in the function but {got} in the query")]
    Arity { expected: usize, got: usize },
}

/// A set of cells at one level of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSet {
    pub level: usize,
    pub bits: BitVec,
}

impl CellSet {
    pub fn empty(cd: &CellDecomposition, level: usize) -> Self {
        CellSet {
            level,
            bits: bitvec![0; cd.cells(level).len()],
        }
    }

    pub fn all(cd: &CellDecomposition, level: usize) -> Self {
        CellSet {
            level,
            bits: bitvec![1; cd.cells(level).len()],
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }
}

/// Planes of the function's breakplanes and graphs under every index context
/// of a `d`-dimensional query, plus the query's constraint planes.
pub fn build_query_arrangement(
    f: Option<&PwlFunction>,
    q: &OrderedPrenexQuery,
) -> Result<Arrangement, QueryError> {
    let d = q.dim();
    let mut arr = Arrangement::new(d);
    if let Some(f) = f.filter(|_| q.matrix.has_f_atom()) {
        let m = f.inputs();
        for ctx in combinations(d, m) {
            for b in f.breakplanes() {
                arr.insert_functional(&b.functional().embed(d, &ctx))?;
            }
        }
        for ctx in combinations(d, m + 1) {
            for c in f.distinct_components() {
                arr.insert_functional(&graph_plane(c, &ctx[..m], ctx[m], d))?;
            }
        }
    }
    for g in q.matrix.atoms() {
        arr.insert_functional(g)?;
    }
    Ok(arr)
}

/// `c(x_args) − x_result` in `R^d`.
fn graph_plane(c: &AffineFunctional, args: &[usize], result: usize, d: usize) -> AffineFunctional {
    c.embed(d, args)
        .sub(&AffineFunctional::coordinate(d, result))
}

/// All strictly increasing `k`-tuples over `0..n`.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Sign of an affine functional through a canonical plane of the top pool.
#[derive(Clone, Copy)]
enum Probe {
    Constant(Sign),
    Plane { slot: usize, orientation: Sign },
}

/// Signs of every top-level cell against the planes a matrix needs, computed
/// once per cell and plane.
struct SideTable {
    slots: usize,
    signs: Vec<Sign>,
}

impl SideTable {
    fn sign(&self, cell: usize, p: Probe) -> Sign {
        match p {
            Probe::Constant(s) => s,
            Probe::Plane { slot, orientation } => orientation.times(self.signs[cell * self.slots + slot]),
        }
    }
}

/// Prepared `F`-atom: context breakplanes and per-position graph planes.
struct FAtomPlan {
    breakplanes: Vec<Probe>,
    graphs: BTreeMap<Vec<Sign>, Probe>,
}

enum Plan {
    True,
    False,
    Atom(Probe),
    FAtom(FAtomPlan),
    Not(Box<Plan>),
    And(Vec<Plan>),
    Or(Vec<Plan>),
}

struct Planner<'a> {
    cd: &'a CellDecomposition,
    planes: indexmap::IndexSet<Hyperplane>,
}

impl Planner<'_> {
    fn probe(&mut self, g: &AffineFunctional) -> Result<Probe, QueryError> {
        match Hyperplane::with_orientation(g) {
            Ok((h, orientation)) => {
                let d = self.cd.dim();
                if !self.cd.pool(d).contains(&h) {
                    return Err(GeometryError::NotInPool(h.to_string(), d).into());
                }
                let (slot, _) = self.planes.insert_full(h);
                Ok(Probe::Plane { slot, orientation })
            }
            Err(GeometryError::Degenerate) => Ok(Probe::Constant(Sign::of(g.constant_term()))),
            Err(e) => Err(e.into()),
        }
    }

    fn plan(&mut self, f: Option<&PwlFunction>, m: &Matrix) -> Result<Plan, QueryError> {
        let d = self.cd.dim();
        Ok(match m {
            Matrix::True => Plan::True,
            Matrix::False => Plan::False,
            Matrix::Atom(g) => Plan::Atom(self.probe(g)?),
            Matrix::FAtom { args, result } => {
                let f = f.ok_or(QueryError::MissingFunction)?;
                let breakplanes = f
                    .breakplanes()
                    .iter()
                    .map(|b| self.probe(&b.functional().embed(d, args)))
                    .collect::<Result<_, _>>()?;
                let graphs = f
                    .polytopes()
                    .iter()
                    .map(|p| Ok((p.position.clone(), self.probe(&graph_plane(&p.component, args, *result, d))?)))
                    .collect::<Result<_, QueryError>>()?;
                Plan::FAtom(FAtomPlan { breakplanes, graphs })
            }
            Matrix::Not(a) => Plan::Not(Box::new(self.plan(f, a)?)),
            Matrix::And(xs) => Plan::And(xs.iter().map(|x| self.plan(f, x)).collect::<Result<_, _>>()?),
            Matrix::Or(xs) => Plan::Or(xs.iter().map(|x| self.plan(f, x)).collect::<Result<_, _>>()?),
        })
    }
}

fn side_table(cd: &CellDecomposition, planes: &indexmap::IndexSet<Hyperplane>) -> SideTable {
    let d = cd.dim();
    let slots = planes.len();
    let signs = cd
        .cells(d)
        .par_iter()
        .flat_map_iter(|c| planes.iter().map(|h| h.side(&c.sample)).collect::<Vec<_>>())
        .collect();
    SideTable { slots, signs }
}

fn select_planned(cd: &CellDecomposition, t: &SideTable, plan: &Plan) -> Result<CellSet, QueryError> {
    let d = cd.dim();
    let n = cd.cells(d).len();
    let from_bools = |hits: Vec<bool>| CellSet {
        level: d,
        bits: hits.into_iter().collect(),
    };
    Ok(match plan {
        Plan::True => CellSet::all(cd, d),
        Plan::False => CellSet::empty(cd, d),
        Plan::Atom(p) => from_bools((0..n).into_par_iter().map(|c| t.sign(c, *p) == Sign::Pos).collect()),
        Plan::FAtom(fp) => from_bools(
            (0..n)
                .into_par_iter()
                .map(|c| {
                    let pos: Vec<Sign> = fp.breakplanes.iter().map(|b| t.sign(c, *b)).collect();
                    let graph = fp
                        .graphs
                        .get(&pos)
                        .ok_or_else(|| PwlError::MissingPosition(crate::affine::signs_to_string(&pos)))?;
                    Ok::<bool, QueryError>(t.sign(c, *graph) == Sign::Zero)
                })
                .collect::<Result<_, _>>()?,
        ),
        Plan::Not(a) => complement(cd, &select_planned(cd, t, a)?),
        Plan::And(xs) => {
            let mut acc = CellSet::all(cd, d);
            for x in xs {
                acc.bits &= select_planned(cd, t, x)?.bits;
            }
            acc
        }
        Plan::Or(xs) => {
            let mut acc = CellSet::empty(cd, d);
            for x in xs {
                acc.bits |= select_planned(cd, t, x)?.bits;
            }
            acc
        }
    })
}

/// Top-level cells satisfying the quantifier-free matrix. The sides of every
/// cell against the planes of the atoms are tabulated once; each atom then
/// yields a cell set and the matrix is evaluated by set operations.
pub fn select_cells_qfree(
    cd: &CellDecomposition,
    f: Option<&PwlFunction>,
    matrix: &Matrix,
) -> Result<CellSet, QueryError> {
    let mut planner = Planner {
        cd,
        planes: indexmap::IndexSet::new(),
    };
    let plan = planner.plan(f, matrix)?;
    let table = side_table(cd, &planner.planes);
    select_planned(cd, &table, &plan)
}

/// Bases of the cells in `s`.
pub fn project_exists(cd: &CellDecomposition, s: &CellSet) -> CellSet {
    assert!(s.level >= 1);
    let mut out = CellSet::empty(cd, s.level - 1);
    for i in s.iter() {
        out.bits.set(cd.cell(s.level, i).base.unwrap(), true);
    }
    out
}

pub fn complement(_cd: &CellDecomposition, s: &CellSet) -> CellSet {
    CellSet {
        level: s.level,
        bits: !s.bits.clone(),
    }
}

/// Eliminate the quantifier prefix from a top-level cell set.
pub fn eliminate_prefix(cd: &CellDecomposition, q: &OrderedPrenexQuery, top: CellSet) -> CellSet {
    let mut s = top;
    for quant in q.prefix.iter().rev() {
        s = match quant {
            Quantifier::Exists => project_exists(cd, &s),
            Quantifier::Forall => complement(cd, &project_exists(cd, &complement(cd, &s))),
        };
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryAnswer {
    Closed(bool),
    /// Cells over the free variables whose points satisfy the query, each
    /// with its sample point.
    Open {
        variables: Vec<String>,
        cells: Vec<(usize, Vec<Rational>)>,
    },
}

/// Statistics of one evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub dimension: usize,
    pub planes: usize,
    pub cells: Vec<usize>,
}

/// Decide an ordered prenex query against `f` (which may be omitted when the
/// query does not mention `F`).
pub fn evaluate_ordered(
    f: Option<&PwlFunction>,
    q: &OrderedPrenexQuery,
) -> Result<(QueryAnswer, QueryStats), QueryError> {
    let (answer, stats, _) = evaluate_with_cd(f, q)?;
    Ok((answer, stats))
}

/// Like [`evaluate_ordered`] but also returns the decomposition and the
/// satisfying cell set at the free-variable level.
pub fn evaluate_with_cd(
    f: Option<&PwlFunction>,
    q: &OrderedPrenexQuery,
) -> Result<
    (
        QueryAnswer,
        QueryStats,
        Option<(CellDecomposition, CellSet)>,
    ),
    QueryError,
> {
    if q.matrix.has_f_atom() {
        let f = f.ok_or(QueryError::MissingFunction)?;
        let m = f.inputs();
        if let Some(bad) = f_atom_arity(&q.matrix).filter(|k| *k != m) {
            return Err(QueryError::Arity {
                expected: m,
                got: bad,
            });
        }
    }
    let d = q.dim();
    if d == 0 {
        let truth = q.matrix.eval(&[], &|_| Rational::zero());
        return Ok((QueryAnswer::Closed(truth), QueryStats::default(), None));
    }
    let arr = build_query_arrangement(f, q)?;
    let cd = build_cd(&arr);
    let top = select_cells_qfree(&cd, f, &q.matrix)?;
    let s = eliminate_prefix(&cd, q, top);
    let stats = QueryStats {
        dimension: d,
        planes: arr.len(),
        cells: cd.level_sizes(),
    };
    let answer = if q.free == 0 {
        QueryAnswer::Closed(s.contains(0))
    } else {
        QueryAnswer::Open {
            variables: q.variables[..q.free].to_vec(),
            cells: s
                .iter()
                .map(|i| (i, cd.cell(q.free, i).sample.clone()))
                .collect(),
        }
    };
    Ok((answer, stats, Some((cd, s))))
}

fn f_atom_arity(m: &Matrix) -> Option<usize> {
    match m {
        Matrix::FAtom { args, .. } => Some(args.len()),
        Matrix::Not(a) => f_atom_arity(a),
        Matrix::And(xs) | Matrix::Or(xs) => xs.iter().find_map(f_atom_arity),
        _ => None,
    }
}

/// Parse, normalise and decide a query. `F` is the first output of `net`; the
/// function is only extracted when the query mentions `F`.
pub fn evaluate_query(
    net: &Network,
    text: &str,
    params: &BTreeMap<String, Rational>,
    free: &[String],
) -> Result<QueryAnswer, QueryError> {
    let ast = parse_query(text, net.inputs())?;
    let q = normalize_ordered_prenex(&ast, params, free)?;
    let f = if q.matrix.has_f_atom() {
        Some(pwl_from_network(net, NeuronId::Output(0))?)
    } else {
        None
    };
    Ok(evaluate_ordered(f.as_ref(), &q)?.0)
}

/// [`evaluate_query`] for a function given directly.
pub fn evaluate_query_pwl(
    f: &PwlFunction,
    text: &str,
    params: &BTreeMap<String, Rational>,
    free: &[String],
) -> Result<QueryAnswer, QueryError> {
    let ast = parse_query(text, f.inputs())?;
    let q = normalize_ordered_prenex(&ast, params, free)?;
    Ok(evaluate_ordered(Some(f), &q)?.0)
}
