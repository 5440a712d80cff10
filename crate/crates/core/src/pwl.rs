//! Piecewise-linear functions as breakplanes plus one affine component per
//! realizable position, and the layer-by-layer extraction from a network.
//!
//! A position assigns `+`, `-` or `=` to every breakplane. A proper function
//! has exactly one polytope per realizable position, so evaluation is a sign
//! vector lookup.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::affine::{signs_from_str, signs_to_string, AffineFunctional, Sign};
use crate::geometry::{arrangement_faces, build_cd, Arrangement, GeometryError, Hyperplane};
use crate::linear::{lp_feasible_point, realizable_sign_vectors, Constraint, Rel};
use crate::network::{Network, NetworkError, NeuronId};
use crate::rational::Rational;

#[derive(Debug, thiserror::Error)]
pub enum PwlError {
    #[error("no polytope has position {0}")]
    MissingPosition(String),
    #[error("expected {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("restriction leaves no free coordinate")]
    EmptyDimension,
    #[error("coordinate {0} is out of range")]
    BadCoordinate(usize),
    #[error("unknown neuron {0}")]
    UnknownNeuron(NeuronId),
    #[error("malformed piecewise-linear function: {0}")]
    Malformed(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polytope {
    pub position: Vec<Sign>,
    pub component: AffineFunctional,
}

#[derive(Debug, Clone)]
pub struct PwlFunction {
    inputs: usize,
    breakplanes: Vec<Hyperplane>,
    polytopes: Vec<Polytope>,
    index: HashMap<Vec<Sign>, usize>,
}

impl PartialEq for PwlFunction {
    fn eq(&self, other: &Self) -> bool {
        self.inputs == other.inputs
            && self.breakplanes == other.breakplanes
            && self.polytopes == other.polytopes
    }
}

impl PwlFunction {
    /// Assemble a function without checking properness (see [`pwl_proper_check`]).
    /// Polytopes are kept in position order.
    pub fn from_parts(
        inputs: usize,
        breakplanes: Vec<Hyperplane>,
        mut polytopes: Vec<Polytope>,
    ) -> Self {
        polytopes.sort_by(|a, b| a.position.cmp(&b.position));
        let mut index = HashMap::with_capacity(polytopes.len());
        for (i, p) in polytopes.iter().enumerate() {
            index.entry(p.position.clone()).or_insert(i);
        }
        PwlFunction {
            inputs,
            breakplanes,
            polytopes,
            index,
        }
    }

    /// The affine function `f` on `R^m` with no breakplanes.
    pub fn affine(f: AffineFunctional) -> Self {
        let m = f.dim();
        Self::from_parts(
            m,
            Vec::new(),
            vec![Polytope {
                position: Vec::new(),
                component: f,
            }],
        )
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn breakplanes(&self) -> &[Hyperplane] {
        &self.breakplanes
    }

    pub fn polytopes(&self) -> &[Polytope] {
        &self.polytopes
    }

    /// The polytope with the given position.
    pub fn polytope_at(&self, position: &[Sign]) -> Option<&Polytope> {
        self.index.get(position).map(|&i| &self.polytopes[i])
    }

    pub fn position_of(&self, x: &[Rational]) -> Vec<Sign> {
        self.breakplanes.iter().map(|h| h.side(x)).collect()
    }

    /// Distinct non-constant components.
    pub fn distinct_components(&self) -> Vec<&AffineFunctional> {
        let mut seen = BTreeSet::new();
        self.polytopes
            .iter()
            .map(|p| &p.component)
            .filter(|c| seen.insert(*c))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = PwlDoc {
            inputs: self.inputs,
            breakplanes: self
                .breakplanes
                .iter()
                .map(|h| h.coeffs().to_vec())
                .collect(),
            polytopes: self
                .polytopes
                .iter()
                .map(|p| PolytopeDoc {
                    position: signs_to_string(&p.position),
                    component: p.component.coeffs().to_vec(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("serialisable")
    }

    /// Read the JSON form. Breakplanes are canonicalised; positions are flipped
    /// where canonicalisation reversed a plane's orientation.
    pub fn from_json(text: &str) -> Result<Self, PwlError> {
        let doc: PwlDoc =
            serde_json::from_str(text).map_err(|e| PwlError::Malformed(e.to_string()))?;
        let m = doc.inputs;
        let mut planes = Vec::new();
        let mut flips = Vec::new();
        for c in doc.breakplanes {
            if c.len() != m + 1 {
                return Err(PwlError::Malformed(format!(
                    "breakplane needs {} coefficients",
                    m + 1
                )));
            }
            let (h, o) = Hyperplane::with_orientation(&AffineFunctional::new(c))?;
            planes.push(h);
            flips.push(o == Sign::Neg);
        }
        let mut polytopes = Vec::new();
        for p in doc.polytopes {
            let signs = signs_from_str(&p.position)
                .ok_or_else(|| PwlError::Malformed(format!("bad position `{}`", p.position)))?;
            if signs.len() != planes.len() || p.component.len() != m + 1 {
                return Err(PwlError::Malformed(
                    "position or component has the wrong length".into(),
                ));
            }
            let position = signs
                .into_iter()
                .zip(&flips)
                .map(|(s, f)| if *f { s.flip() } else { s })
                .collect();
            polytopes.push(Polytope {
                position,
                component: AffineFunctional::new(p.component),
            });
        }
        Ok(Self::from_parts(m, planes, polytopes))
    }
}

#[derive(Serialize, Deserialize)]
struct PwlDoc {
    inputs: usize,
    breakplanes: Vec<Vec<Rational>>,
    polytopes: Vec<PolytopeDoc>,
}

#[derive(Serialize, Deserialize)]
struct PolytopeDoc {
    position: String,
    component: Vec<Rational>,
}

/// Every realizable position of `planes` in `R^dim` with a witness point.
/// Up to dimension 2 the positions are read off the sample points of a
/// cylindrical decomposition; higher dimensions refine the face list plane by
/// plane instead, which avoids the much larger decomposition.
pub fn realizable_positions(dim: usize, planes: &[Hyperplane]) -> Vec<(Vec<Sign>, Vec<Rational>)> {
    if planes.is_empty() {
        return vec![(Vec::new(), vec![Rational::zero(); dim])];
    }
    if dim > 2 {
        return arrangement_faces(dim, planes);
    }
    let arr =
        Arrangement::from_planes(dim, planes.iter().cloned()).expect("planes share the dimension");
    debug_assert_eq!(arr.len(), planes.len(), "planes must be distinct");
    let cd = build_cd(&arr);
    let mut out: BTreeMap<Vec<Sign>, Vec<Rational>> = BTreeMap::new();
    for s in cd.samples(dim) {
        out.entry(arr.sign_vector(s)).or_insert_with(|| s.to_vec());
    }
    out.into_iter().collect()
}

/// The coordinate functions `x ↦ x_i` on `R^m`.
pub fn init_inputs(m: usize) -> Vec<PwlFunction> {
    (0..m)
        .map(|i| PwlFunction::affine(AffineFunctional::coordinate(m, i)))
        .collect()
}

pub fn scale_stage(f: &PwlFunction, w: &Rational) -> PwlFunction {
    let polytopes = f
        .polytopes
        .iter()
        .map(|p| Polytope {
            position: p.position.clone(),
            component: p.component.scale(w),
        })
        .collect();
    PwlFunction::from_parts(f.inputs, f.breakplanes.clone(), polytopes)
}

/// Union of breakplanes in first-seen order, with each input's index map.
fn merge_planes(fs: &[&PwlFunction]) -> (Vec<Hyperplane>, Vec<Vec<usize>>) {
    let mut all: indexmap::IndexSet<Hyperplane> = indexmap::IndexSet::new();
    let maps = fs
        .iter()
        .map(|f| {
            f.breakplanes
                .iter()
                .map(|h| all.insert_full(h.clone()).0)
                .collect()
        })
        .collect();
    (all.into_iter().collect(), maps)
}

fn project(position: &[Sign], map: &[usize]) -> Vec<Sign> {
    map.iter().map(|&i| position[i]).collect()
}

/// `bias + Σ fs`, proper over the union of the inputs' breakplanes.
pub fn sum_stage(fs: &[PwlFunction], bias: &Rational) -> PwlFunction {
    assert!(!fs.is_empty(), "sum of no functions");
    let m = fs[0].inputs;
    assert!(
        fs.iter().all(|f| f.inputs == m),
        "summands must share the input dimension"
    );
    let refs: Vec<&PwlFunction> = fs.iter().collect();
    let (planes, maps) = merge_planes(&refs);
    let polytopes = realizable_positions(m, &planes)
        .into_iter()
        .map(|(position, _)| {
            let mut comp = AffineFunctional::constant(m, bias.clone());
            for (f, map) in fs.iter().zip(&maps) {
                let p = f
                    .polytope_at(&project(&position, map))
                    .expect("input function is proper");
                comp = comp.add(&p.component);
            }
            Polytope {
                position,
                component: comp,
            }
        })
        .collect();
    PwlFunction::from_parts(m, planes, polytopes)
}

/// `max(0, f)`: breakplanes grow by the zero sets of the non-constant components.
pub fn relu_stage(f: &PwlFunction) -> PwlFunction {
    let m = f.inputs;
    let mut planes: indexmap::IndexSet<Hyperplane> = f.breakplanes.iter().cloned().collect();
    // Per component: index of its zero plane and the orientation of the component against it.
    let mut zero_of: HashMap<&AffineFunctional, (usize, Sign)> = HashMap::new();
    for p in &f.polytopes {
        if p.component.is_constant() || zero_of.contains_key(&p.component) {
            continue;
        }
        let (h, o) = Hyperplane::with_orientation(&p.component).expect("non-constant component");
        let (i, _) = planes.insert_full(h);
        zero_of.insert(&p.component, (i, o));
    }
    let planes: Vec<Hyperplane> = planes.into_iter().collect();
    let k = f.breakplanes.len();
    let polytopes = realizable_positions(m, &planes)
        .into_iter()
        .map(|(position, _)| {
            let p = f
                .polytope_at(&position[..k])
                .expect("input function is proper");
            let sign = match zero_of.get(&p.component) {
                Some(&(i, o)) => o.times(position[i]),
                None => Sign::of(p.component.constant_term()),
            };
            let component = if sign == Sign::Pos {
                p.component.clone()
            } else {
                AffineFunctional::zero(m)
            };
            Polytope {
                position,
                component,
            }
        })
        .collect();
    PwlFunction::from_parts(m, planes, polytopes)
}

/// The function computed at `target`, built by composing the stages layer by
/// layer. Output units skip the ReLU.
pub fn pwl_from_network(net: &Network, target: NeuronId) -> Result<PwlFunction, PwlError> {
    let m = net.inputs();
    let mut layer = init_inputs(m);
    let incoming = |prev: &[PwlFunction], n: &crate::network::Neuron| {
        let mut terms: Vec<PwlFunction> = n
            .weights
            .iter()
            .zip(prev)
            .filter_map(|(w, f)| w.as_ref().map(|w| scale_stage(f, w)))
            .collect();
        if terms.is_empty() {
            terms.push(PwlFunction::affine(AffineFunctional::zero(m)));
        }
        sum_stage(&terms, &n.bias)
    };
    match target {
        NeuronId::Input(i) => {
            return layer
                .into_iter()
                .nth(i)
                .ok_or(PwlError::UnknownNeuron(target))
        }
        NeuronId::Hidden { layer: l, index } => {
            if l >= net.hidden().len() || index >= net.hidden()[l].len() {
                return Err(PwlError::UnknownNeuron(target));
            }
            for (depth, neurons) in net.hidden().iter().enumerate().take(l + 1) {
                if depth == l {
                    return Ok(relu_stage(&incoming(&layer, &neurons[index])));
                }
                layer = neurons
                    .iter()
                    .map(|n| relu_stage(&incoming(&layer, n)))
                    .collect();
            }
            unreachable!()
        }
        NeuronId::Output(j) => {
            let out = net
                .outputs()
                .get(j)
                .ok_or(PwlError::UnknownNeuron(target))?;
            for neurons in net.hidden() {
                layer = neurons
                    .iter()
                    .map(|n| relu_stage(&incoming(&layer, n)))
                    .collect();
            }
            Ok(incoming(&layer, out))
        }
    }
}

pub fn pwl_eval(f: &PwlFunction, x: &[Rational]) -> Result<Rational, PwlError> {
    if x.len() != f.inputs {
        return Err(PwlError::Dimension {
            expected: f.inputs,
            got: x.len(),
        });
    }
    let pos = f.position_of(x);
    let p = f
        .polytope_at(&pos)
        .ok_or_else(|| PwlError::MissingPosition(signs_to_string(&pos)))?;
    Ok(p.component.eval(x))
}

/// Substitute fixed values (0-based coordinate → value) and keep the function
/// of the remaining coordinates in their original order.
pub fn pwl_restrict(
    f: &PwlFunction,
    fixed: &BTreeMap<usize, Rational>,
) -> Result<PwlFunction, PwlError> {
    if let Some(&i) = fixed.keys().find(|&&i| i >= f.inputs) {
        return Err(PwlError::BadCoordinate(i));
    }
    if fixed.is_empty() {
        return Ok(f.clone());
    }
    let r = f.inputs - fixed.len();
    if r == 0 {
        return Err(PwlError::EmptyDimension);
    }
    let subst: Vec<Option<Rational>> = (0..f.inputs).map(|i| fixed.get(&i).cloned()).collect();
    enum Image {
        Constant(Sign),
        Plane(usize, Sign),
    }
    let mut planes: indexmap::IndexSet<Hyperplane> = indexmap::IndexSet::new();
    let images: Vec<Image> = f
        .breakplanes
        .iter()
        .map(|h| {
            let g = h.functional().substitute(&subst);
            match Hyperplane::with_orientation(&g) {
                Ok((h, o)) => Image::Plane(planes.insert_full(h).0, o),
                Err(_) => Image::Constant(Sign::of(g.constant_term())),
            }
        })
        .collect();
    let planes: Vec<Hyperplane> = planes.into_iter().collect();
    let polytopes = realizable_positions(r, &planes)
        .into_iter()
        .map(|(position, _)| {
            let original: Vec<Sign> = images
                .iter()
                .map(|im| match im {
                    Image::Constant(s) => *s,
                    Image::Plane(i, o) => o.times(position[*i]),
                })
                .collect();
            let p = f.polytope_at(&original).expect("input function is proper");
            Polytope {
                position,
                component: p.component.substitute(&subst),
            }
        })
        .collect();
    Ok(PwlFunction::from_parts(r, planes, polytopes))
}

/// A function that agrees with `f` on the open box `region` and keeps only the
/// breakplanes crossing it. Positions that miss the box get the component of
/// their witness point, so the result is total but need not match `f` there.
pub fn pwl_localize(f: &PwlFunction, region: &[(Rational, Rational)]) -> Result<PwlFunction, PwlError> {
    let m = f.inputs;
    if region.len() != m {
        return Err(PwlError::Dimension {
            expected: m,
            got: region.len(),
        });
    }
    let mut walls = Vec::with_capacity(2 * m);
    for (i, (lo, hi)) in region.iter().enumerate() {
        let xi = AffineFunctional::coordinate(m, i);
        walls.push(Constraint::new(xi.add_constant(&-lo), Rel::Gt));
        walls.push(Constraint::new(xi.neg().add_constant(hi), Rel::Gt));
    }
    let point_in_box = |extra: Vec<Constraint>| {
        let mut rows = walls.clone();
        rows.extend(extra);
        lp_feasible_point(m, &rows)
    };
    let planes: Vec<Hyperplane> = f
        .breakplanes
        .iter()
        .filter(|h| point_in_box(vec![Constraint::new(h.functional().clone(), Rel::Eq)]).is_some())
        .cloned()
        .collect();
    let polytopes = realizable_positions(m, &planes)
        .into_iter()
        .map(|(position, witness)| {
            let sides = planes.iter().zip(&position).map(|(h, &s)| Constraint::side(h.functional(), s)).collect();
            let x = point_in_box(sides).unwrap_or(witness);
            let p = f.polytope_at(&f.position_of(&x)).expect("input function is proper");
            Polytope {
                position,
                component: p.component.clone(),
            }
        })
        .collect();
    Ok(PwlFunction::from_parts(m, planes, polytopes))
}

/// Properness: unique and total positions, exactly the realizable positions
/// (decided by Fourier–Motzkin elimination), and continuity across every
/// breakplane.
pub fn pwl_proper_check(f: &PwlFunction) -> bool {
    let k = f.breakplanes.len();
    if f.breakplanes.iter().any(|h| h.dim() != f.inputs)
        || f.polytopes.iter().any(|p| p.component.dim() != f.inputs)
    {
        return false;
    }
    let mut seen = BTreeSet::new();
    for p in &f.polytopes {
        if p.position.len() != k || !seen.insert(p.position.clone()) {
            return false;
        }
    }
    if f.breakplanes.iter().collect::<BTreeSet<_>>().len() != k {
        return false;
    }
    let fs: Vec<AffineFunctional> = f
        .breakplanes
        .iter()
        .map(|h| h.functional().clone())
        .collect();
    let realizable: BTreeSet<Vec<Sign>> = realizable_sign_vectors(f.inputs, &fs)
        .into_iter()
        .map(|(s, _)| s)
        .collect();
    if realizable != seen {
        return false;
    }
    for p in &f.polytopes {
        for (i, s) in p.position.iter().enumerate() {
            if *s != Sign::Zero {
                continue;
            }
            for side in [Sign::Neg, Sign::Pos] {
                let mut q = p.position.clone();
                q[i] = side;
                if let Some(other) = f.polytope_at(&q) {
                    if !p
                        .component
                        .sub(&other.component)
                        .is_multiple_of(f.breakplanes[i].functional())
                    {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Breakpoints of a function of one variable, in increasing order.
pub fn breakpoints_1d(f: &PwlFunction) -> Vec<Rational> {
    assert_eq!(f.inputs, 1);
    let mut pts: Vec<Rational> = f.breakplanes.iter().map(|h| h.section_value(&[])).collect();
    pts.sort();
    pts
}
