//! Layered ReLU networks: loading, exact forward evaluation, the weighted
//! structure encoding, and FO(SUM) terms that evaluate a network.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};

use crate::fosum::{eval_formula, eval_weight_term, Formula, StdTerm, Term, Valuation};
use crate::lifted::LiftedRational;
use crate::rational::Rational;
use crate::structure::{ElementId, StructureBuilder, Vocabulary, WeightedStructure};

#[derive(Debug, thiserror::Error)]
pub enum NetworkError {
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("non-layered network: {0}")]
    NonLayered(String),
    #[error("input nodes carry no bias")]
    BiasOnInput,
    #[error("bad rational literal `{0}`")]
    BadRational(String),
    #[error("expected {expected} input values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NeuronId {
    Input(usize),
    /// Hidden layer `layer` (0-based) and position within it.
    Hidden {
        layer: usize,
        index: usize,
    },
    Output(usize),
}

impl fmt::Display for NeuronId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeuronId::Input(i) => write!(f, "in{}", i + 1),
            NeuronId::Hidden { layer, index } => write!(f, "h{}_{}", layer + 1, index + 1),
            NeuronId::Output(j) => write!(f, "out{}", j + 1),
        }
    }
}

/// A hidden or output unit. `weights[k]` is the edge from node `k` of the
/// previous layer; `None` means there is no edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neuron {
    pub bias: Rational,
    pub weights: Vec<Option<Rational>>,
}

impl Neuron {
    pub fn dense(bias: Rational, weights: Vec<Rational>) -> Self {
        Neuron {
            bias,
            weights: weights.into_iter().map(Some).collect(),
        }
    }

    fn preactivation(&self, prev: &[Rational]) -> Rational {
        let mut acc = self.bias.clone();
        for (w, x) in self.weights.iter().zip(prev) {
            if let Some(w) = w {
                acc += w * x;
            }
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    inputs: usize,
    hidden: Vec<Vec<Neuron>>,
    outputs: Vec<Neuron>,
}

fn relu(x: Rational) -> Rational {
    if x.is_positive() {
        x
    } else {
        Rational::zero()
    }
}

impl Network {
    pub fn new(
        inputs: usize,
        hidden: Vec<Vec<Neuron>>,
        outputs: Vec<Neuron>,
    ) -> Result<Self, NetworkError> {
        if inputs == 0 {
            return Err(NetworkError::Invalid(
                "a network needs at least one input".into(),
            ));
        }
        if outputs.is_empty() {
            return Err(NetworkError::Invalid(
                "a network needs at least one output".into(),
            ));
        }
        let mut width = inputs;
        for (l, layer) in hidden.iter().chain(std::iter::once(&outputs)).enumerate() {
            for (i, n) in layer.iter().enumerate() {
                if n.weights.len() != width {
                    let what = if l < hidden.len() {
                        format!("hidden neuron {} of layer {}", i + 1, l + 1)
                    } else {
                        format!("output {}", i + 1)
                    };
                    return Err(NetworkError::NonLayered(format!(
                        "{what} has {} weights but the previous layer has {width} nodes",
                        n.weights.len()
                    )));
                }
            }
            width = layer.len();
        }
        Ok(Network {
            inputs,
            hidden,
            outputs,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> &[Neuron] {
        &self.outputs
    }

    pub fn hidden(&self) -> &[Vec<Neuron>] {
        &self.hidden
    }

    /// Depth ℓ: number of hidden layers plus one.
    pub fn depth(&self) -> usize {
        self.hidden.len() + 1
    }

    pub fn hidden_ids(&self) -> impl Iterator<Item = NeuronId> + '_ {
        self.hidden.iter().enumerate().flat_map(|(layer, ns)| {
            (0..ns.len()).map(move |index| NeuronId::Hidden { layer, index })
        })
    }

    fn check_dim(&self, x: &[Rational]) -> Result<(), NetworkError> {
        if x.len() != self.inputs {
            return Err(NetworkError::Dimension {
                expected: self.inputs,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Exact outputs; hidden units apply ReLU, outputs are linear.
    pub fn forward(&self, x: &[Rational]) -> Result<Vec<Rational>, NetworkError> {
        self.forward_ablated(x, None)
    }

    /// Forward pass in which the given hidden unit feeds 0 to its successors.
    pub fn forward_ablated(
        &self,
        x: &[Rational],
        removed: Option<NeuronId>,
    ) -> Result<Vec<Rational>, NetworkError> {
        self.check_dim(x)?;
        let mut act = x.to_vec();
        for (l, layer) in self.hidden.iter().enumerate() {
            act = layer
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    if removed == Some(NeuronId::Hidden { layer: l, index: i }) {
                        Rational::zero()
                    } else {
                        relu(n.preactivation(&act))
                    }
                })
                .collect();
        }
        Ok(self.outputs.iter().map(|n| n.preactivation(&act)).collect())
    }

    pub fn to_json(&self) -> Value {
        let neuron = |n: &Neuron| {
            json!({
                "bias": n.bias.to_string(),
                "weights": n.weights.iter().map(|w| w.as_ref().map(|w| w.to_string())).collect::<Vec<_>>(),
            })
        };
        json!({
            "inputs": self.inputs,
            "hidden": self.hidden.iter().map(|l| l.iter().map(neuron).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "outputs": self.outputs.iter().map(neuron).collect::<Vec<_>>(),
        })
    }
}

/// Parse a JSON rational: a string literal or a JSON integer. Non-integral
/// JSON numbers are rejected since they are binary floats.
pub fn json_rational(v: &Value) -> Result<Rational, NetworkError> {
    match v {
        Value::String(s) => s.parse().map_err(|_| NetworkError::BadRational(s.clone())),
        Value::Number(n) if n.is_i64() => Ok(Rational::from_int(n.as_i64().expect("checked"))),
        Value::Number(n) => Err(NetworkError::BadRational(format!(
            "{n} (binary floats are not accepted; quote the value as a string)"
        ))),
        other => Err(NetworkError::BadRational(other.to_string())),
    }
}

fn parse_neuron(v: &Value) -> Result<Neuron, NetworkError> {
    let obj = v
        .as_object()
        .ok_or_else(|| NetworkError::Malformed("neuron must be an object".into()))?;
    let bias = json_rational(obj.get("bias").unwrap_or(&Value::String("0".into())))?;
    let weights = obj
        .get("weights")
        .and_then(Value::as_array)
        .ok_or_else(|| NetworkError::Malformed("neuron needs a `weights` array".into()))?
        .iter()
        .map(|w| {
            if w.is_null() {
                Ok(None)
            } else {
                json_rational(w).map(Some)
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(Neuron { bias, weights })
}

/// Load a model from its JSON text.
pub fn load_network(text: &str) -> Result<Network, NetworkError> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| NetworkError::Malformed(e.to_string()))?;
    let inputs = match v.get("inputs") {
        Some(Value::Number(n)) => n
            .as_u64()
            .ok_or_else(|| NetworkError::Malformed("`inputs` must be a positive integer".into()))?
            as usize,
        Some(Value::Array(nodes)) => {
            if nodes.iter().any(|n| n.get("bias").is_some()) {
                return Err(NetworkError::BiasOnInput);
            }
            nodes.len()
        }
        _ => return Err(NetworkError::Malformed("missing `inputs`".into())),
    };
    let hidden = match v.get("hidden") {
        None => Vec::new(),
        Some(Value::Array(layers)) => layers
            .iter()
            .map(|l| {
                l.as_array()
                    .ok_or_else(|| {
                        NetworkError::Malformed("each hidden layer must be an array".into())
                    })?
                    .iter()
                    .map(parse_neuron)
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(NetworkError::Malformed("`hidden` must be an array".into())),
    };
    let outputs = v
        .get("outputs")
        .and_then(Value::as_array)
        .ok_or_else(|| NetworkError::Malformed("missing `outputs` array".into()))?
        .iter()
        .map(parse_neuron)
        .collect::<Result<Vec<_>, _>>()?;
    Network::new(inputs, hidden, outputs)
}

/// Element order: inputs, hidden layers in order, outputs.
fn element_of(net: &Network, id: NeuronId) -> ElementId {
    let offset: usize = match id {
        NeuronId::Input(i) => i,
        NeuronId::Hidden { layer, index } => {
            net.inputs + net.hidden[..layer].iter().map(Vec::len).sum::<usize>() + index
        }
        NeuronId::Output(j) => net.inputs + net.hidden.iter().map(Vec::len).sum::<usize>() + j,
    };
    ElementId(offset)
}

/// Encode a network over the vocabulary with edge relation `E`, weights `w`
/// (default 0) and `b` (⊥ on inputs), and constants `in1.., out1..`. With a
/// single input or output, `in` and `out` name it as well.
pub fn to_structure(net: &Network) -> WeightedStructure {
    let m = net.inputs;
    let n = net.outputs.len();
    let mut vocab = Vocabulary::new();
    vocab.add_relation("E", 2).expect("fresh");
    vocab.add_weight("w", 2).expect("fresh");
    vocab.add_weight("b", 1).expect("fresh");
    for i in 1..=m {
        vocab.add_constant(&format!("in{i}")).expect("fresh");
    }
    for j in 1..=n {
        vocab.add_constant(&format!("out{j}")).expect("fresh");
    }
    if m == 1 {
        vocab.add_constant("in").expect("fresh");
    }
    if n == 1 {
        vocab.add_constant("out").expect("fresh");
    }

    let mut ids: Vec<NeuronId> = (0..m).map(NeuronId::Input).collect();
    ids.extend(net.hidden_ids());
    ids.extend((0..n).map(NeuronId::Output));
    let labels = ids.iter().map(|id| id.to_string()).collect();

    let mut b = StructureBuilder::new(vocab, labels);
    b.set_default("w", LiftedRational::zero())
        .expect("declared");
    for i in 0..m {
        b.set_constant(&format!("in{}", i + 1), ElementId(i))
            .expect("declared");
    }
    if m == 1 {
        b.set_constant("in", ElementId(0)).expect("declared");
    }
    for j in 0..n {
        let e = element_of(net, NeuronId::Output(j));
        b.set_constant(&format!("out{}", j + 1), e)
            .expect("declared");
        if n == 1 {
            b.set_constant("out", e).expect("declared");
        }
    }

    let mut prev: Vec<NeuronId> = (0..m).map(NeuronId::Input).collect();
    let layers = net
        .hidden
        .iter()
        .enumerate()
        .map(|(l, ns)| {
            (
                ns,
                (0..ns.len())
                    .map(|i| NeuronId::Hidden { layer: l, index: i })
                    .collect::<Vec<_>>(),
            )
        })
        .chain(std::iter::once((
            &net.outputs,
            (0..n).map(NeuronId::Output).collect(),
        )));
    for (neurons, here) in layers {
        for (neuron, id) in neurons.iter().zip(&here) {
            let u = element_of(net, *id);
            b.set_weight("b", vec![u], LiftedRational::Value(neuron.bias.clone()))
                .expect("declared");
            for (w, p) in neuron.weights.iter().zip(&prev) {
                if let Some(w) = w {
                    let x = element_of(net, *p);
                    b.add_tuple("E", vec![x, u]).expect("declared");
                    b.set_weight("w", vec![x, u], LiftedRational::Value(w.clone()))
                        .expect("declared");
                }
            }
        }
        prev = here;
    }
    b.build().expect("all constants assigned")
}

/// [`to_structure`] extended with weight constants `val1..valm` holding `x`.
pub fn to_structure_with_inputs(
    net: &Network,
    x: &[Rational],
) -> Result<WeightedStructure, NetworkError> {
    net.check_dim(x)?;
    let vals: Vec<(String, LiftedRational)> = x
        .iter()
        .enumerate()
        .map(|(i, v)| (format!("val{}", i + 1), LiftedRational::Value(v.clone())))
        .collect();
    to_structure(net)
        .with_weight_constants(&vals)
        .map_err(|e| NetworkError::Invalid(e.to_string()))
}

fn var(name: &str) -> StdTerm {
    StdTerm::Var(name.to_string())
}

fn cnst(name: &str) -> StdTerm {
    StdTerm::Const(name.to_string())
}

/// Summation guard `E(x, u)`, with the conjunct `x ≠ z` when excluding `z`.
fn edge_guard(x: &str, u: StdTerm, exclude: Option<&str>) -> Formula {
    let e = Formula::rel("E", vec![var(x), u]);
    match exclude {
        Some(z) => Formula::and(e, Formula::not(Formula::Equal(var(x), var(z)))),
        None => e,
    }
}

fn affine_inputs(m: usize, u: StdTerm) -> Term {
    let mut t = Term::weight("b", vec![u.clone()]);
    for i in 1..=m {
        let w = Term::weight("w", vec![cnst(&format!("in{i}")), u.clone()]);
        t = t.add(w.mul(Term::weight(&format!("val{i}"), vec![])));
    }
    t
}

/// Value of a neuron `u` in hidden layer `l` (1-based).
fn layer_term(m: usize, l: usize, u: StdTerm, exclude: Option<&str>) -> Term {
    if l == 1 {
        return Term::relu(affine_inputs(m, u));
    }
    let x = format!("x{l}");
    let inner = layer_term(m, l - 1, var(&x), exclude);
    let body = Term::weight("w", vec![var(&x), u.clone()]).mul(inner);
    let s = Term::sum(vec![x.clone()], edge_guard(&x, u.clone(), exclude), body);
    Term::relu(Term::weight("b", vec![u]).add(s))
}

fn eval_term(m: usize, depth: usize, j: usize, exclude: Option<&str>) -> Term {
    let out = cnst(&format!("out{j}"));
    if depth == 1 {
        return affine_inputs(m, out);
    }
    let x = format!("x{depth}");
    let inner = layer_term(m, depth - 1, var(&x), exclude);
    let body = Term::weight("w", vec![var(&x), out.clone()]).mul(inner);
    let s = Term::sum(vec![x.clone()], edge_guard(&x, out.clone(), exclude), body);
    Term::weight("b", vec![out]).add(s)
}

/// Closed weight term computing output `j` (1-based) of any network with `m`
/// inputs and depth `depth`, reading the inputs from `val1..valm`.
pub fn build_eval_term(m: usize, depth: usize, j: usize) -> Term {
    eval_term(m, depth, j, None)
}

/// The evaluation term with every summation guard strengthened by `x ≠ z`.
pub fn build_ablated_eval_term(m: usize, depth: usize, j: usize, z: &str) -> Term {
    eval_term(m, depth, j, Some(z))
}

/// Formula with free variable `z`: `|eval − eval'| < eps`.
pub fn useless_neuron_formula(m: usize, depth: usize, j: usize) -> Formula {
    let diff = build_eval_term(m, depth, j).sub(build_ablated_eval_term(m, depth, j, "z"));
    Formula::lt(Term::abs(diff), Term::weight("eps", vec![]))
}

fn check_eps(eps: &Rational) -> Result<(), NetworkError> {
    if !eps.is_positive() {
        return Err(NetworkError::Invalid("epsilon must be positive".into()));
    }
    Ok(())
}

/// Hidden units whose removal moves the first output by less than `eps`,
/// decided by evaluating the FO(SUM) formula on the network structure.
pub fn useless_neurons(
    net: &Network,
    vals: &[Rational],
    eps: &Rational,
) -> Result<BTreeSet<NeuronId>, NetworkError> {
    check_eps(eps)?;
    let s = to_structure_with_inputs(net, vals)?
        .with_weight_constants(&[("eps".to_string(), LiftedRational::Value(eps.clone()))])
        .map_err(|e| NetworkError::Invalid(e.to_string()))?;
    let phi = useless_neuron_formula(net.inputs, net.depth(), 1);
    Ok(net
        .hidden_ids()
        .filter(|id| eval_formula(&s, &phi, &Valuation::new().with("z", element_of(net, *id))))
        .collect())
}

/// Same set as [`useless_neurons`], computed by re-running the forward pass
/// with each hidden unit removed.
pub fn useless_neurons_direct(
    net: &Network,
    vals: &[Rational],
    eps: &Rational,
) -> Result<BTreeSet<NeuronId>, NetworkError> {
    check_eps(eps)?;
    let base = net.forward(vals)?[0].clone();
    let mut out = BTreeSet::new();
    for id in net.hidden_ids() {
        let ablated = net.forward_ablated(vals, Some(id))?[0].clone();
        if (&base - &ablated).abs() < *eps {
            out.insert(id);
        }
    }
    Ok(out)
}

/// Evaluate output `j` (1-based) through the FO(SUM) evaluation term.
pub fn eval_via_fosum(
    net: &Network,
    x: &[Rational],
    j: usize,
) -> Result<LiftedRational, NetworkError> {
    let s = to_structure_with_inputs(net, x)?;
    Ok(eval_weight_term(
        &s,
        &build_eval_term(net.inputs, net.depth(), j),
        &Valuation::new(),
    ))
}

/// Depth-2 network with unit-height triangular teeth: positive at the points of
/// `s1`, negative at those of `s2`, zero elsewhere.
///
/// Every tooth has base width `min{m, M, 1 − max}/2`, where `m` is the least
/// point and `M` the least gap between points, so teeth stay disjoint and
/// inside `(0, 1)`.
pub fn build_sawtooth(s1: &[Rational], s2: &[Rational]) -> Result<Network, NetworkError> {
    let mut all: Vec<Rational> = s1.iter().chain(s2).cloned().collect();
    all.sort();
    if all.windows(2).any(|w| w[0] == w[1]) {
        return Err(NetworkError::Invalid(
            "tooth positions must be distinct and the sets disjoint".into(),
        ));
    }
    if all
        .iter()
        .any(|s| !s.is_positive() || *s >= Rational::one())
    {
        return Err(NetworkError::Invalid(
            "tooth positions must lie in (0, 1)".into(),
        ));
    }
    let mut hidden = Vec::new();
    let mut out_weights = Vec::new();
    if let (Some(lo), Some(hi)) = (all.first(), all.last()) {
        let mut width = lo.clone().min(Rational::one() - hi);
        for w in all.windows(2) {
            width = width.min(&w[1] - &w[0]);
        }
        let half = &width / Rational::from_int(4);
        let slope = half.recip();
        for (points, sign) in [(s1, Rational::one()), (s2, -Rational::one())] {
            for s in points {
                let h = &sign * &slope;
                for (shift, k) in [
                    (-&half, Rational::one()),
                    (Rational::zero(), Rational::from_int(-2)),
                    (half.clone(), Rational::one()),
                ] {
                    hidden.push(Neuron::dense(-(s + &shift), vec![Rational::one()]));
                    out_weights.push(&h * &k);
                }
            }
        }
    }
    let output = Neuron::dense(Rational::zero(), out_weights);
    Network::new(1, vec![hidden], vec![output])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    const RELU_NET: &str = r#"{"inputs": 1,
        "hidden": [[{"bias": "0", "weights": ["1"]}]],
        "outputs": [{"bias": "0", "weights": ["1"]}]}"#;

    #[test]
    fn relu_net_forward() {
        let net = load_network(RELU_NET).unwrap();
        assert_eq!(net.forward(&[q("-2")]).unwrap(), vec![q("0")]);
        assert_eq!(net.forward(&[q("3")]).unwrap(), vec![q("3")]);
        assert!(matches!(
            net.forward(&[]),
            Err(NetworkError::Dimension { .. })
        ));
    }

    #[test]
    fn constant_net() {
        let net = load_network(
            r#"{"inputs": 2, "hidden": [[{"bias": "0", "weights": ["0", "0"]}]],
                "outputs": [{"bias": "5/2", "weights": ["0"]}]}"#,
        )
        .unwrap();
        assert_eq!(net.forward(&[q("7"), q("-1/3")]).unwrap(), vec![q("5/2")]);
    }

    #[test]
    fn load_errors() {
        let skip = r#"{"inputs": 1, "hidden": [[{"bias": "0", "weights": ["1"]}]],
                       "outputs": [{"bias": "0", "weights": ["1", "1"]}]}"#;
        assert!(matches!(
            load_network(skip),
            Err(NetworkError::NonLayered(_))
        ));
        let float = r#"{"inputs": 1, "outputs": [{"bias": 0.5, "weights": ["1"]}]}"#;
        assert!(matches!(
            load_network(float),
            Err(NetworkError::BadRational(_))
        ));
        let bad = r#"{"inputs": 1, "outputs": [{"bias": "1/x", "weights": ["1"]}]}"#;
        assert!(matches!(
            load_network(bad),
            Err(NetworkError::BadRational(_))
        ));
        let biased = r#"{"inputs": [{"bias": "1"}], "outputs": [{"bias": "0", "weights": ["1"]}]}"#;
        assert!(matches!(
            load_network(biased),
            Err(NetworkError::BiasOnInput)
        ));
        assert!(matches!(load_network("{"), Err(NetworkError::Malformed(_))));
    }

    #[test]
    fn structure_encoding() {
        let net = load_network(RELU_NET).unwrap();
        let s = to_structure(&net);
        assert_eq!(s.domain_size(), 3);
        let (i, h, o) = (ElementId(0), ElementId(1), ElementId(2));
        let edges: Vec<_> = s.relation_tuples("E").cloned().collect();
        assert_eq!(edges, vec![vec![i, h], vec![h, o]]);
        assert_eq!(s.weight("w", &[o, i]), LiftedRational::zero());
        assert!(s.weight("b", &[i]).is_bottom());
        assert_eq!(s.constant("in1"), Some(i));
        assert_eq!(s.constant("out"), Some(o));
    }

    #[test]
    fn introduction_formula_decides_sign() {
        let net = load_network(
            r#"{"inputs": 1, "hidden": [[{"bias": "1", "weights": ["-1"]}, {"bias": "0", "weights": ["2"]}]],
                "outputs": [{"bias": "-1/2", "weights": ["1", "-1"]}]}"#,
        )
        .unwrap();
        let text = "0 < b(out) + sum{x : E(in, x)} w(x, out) * (if w(in, x) * val + b(x) > 0 \
                    then w(in, x) * val + b(x) else 0)";
        for x in ["-3", "-1/4", "0", "1/8", "1/3", "2"] {
            let x = q(x);
            let s = to_structure(&net)
                .with_weight_constants(&[("val".into(), LiftedRational::Value(x.clone()))])
                .unwrap();
            let f = crate::fosum::parse_formula(text, s.vocabulary()).unwrap();
            let expected = net.forward(&[x]).unwrap()[0].is_positive();
            assert_eq!(eval_formula(&s, &f, &Valuation::new()), expected);
        }
    }

    #[test]
    fn eval_term_shapes() {
        let t = build_eval_term(2, 1, 1);
        assert!(!matches!(&t, Term::Sum { .. }));
        assert_eq!(t.free_variables().len(), 0);
        let t = build_eval_term(1, 3, 1);
        assert!(t.free_variables().is_empty());
    }

    #[test]
    fn useless_examples() {
        let net = load_network(
            r#"{"inputs": 1, "hidden": [[{"bias": "0", "weights": ["1"]}, {"bias": "1", "weights": ["1"]}]],
                "outputs": [{"bias": "0", "weights": ["1", "0"]}]}"#,
        )
        .unwrap();
        let u = useless_neurons(&net, &[q("1")], &q("1/100")).unwrap();
        assert_eq!(u, BTreeSet::from([NeuronId::Hidden { layer: 0, index: 1 }]));
        let all = useless_neurons(&net, &[q("1")], &q("1000000")).unwrap();
        assert_eq!(all.len(), 2);
        let single = load_network(RELU_NET).unwrap();
        assert!(useless_neurons(&single, &[q("1")], &q("1/2"))
            .unwrap()
            .is_empty());
        assert!(useless_neurons(&single, &[q("1")], &q("0")).is_err());
    }

    #[test]
    fn sawtooth_shape() {
        let net = build_sawtooth(&[q("1/4")], &[q("1/2")]).unwrap();
        assert_eq!(net.forward(&[q("1/4")]).unwrap(), vec![q("1")]);
        assert_eq!(net.forward(&[q("1/2")]).unwrap(), vec![q("-1")]);
        assert_eq!(net.forward(&[q("3/8")]).unwrap(), vec![q("0")]);
        assert_eq!(net.forward(&[q("0")]).unwrap(), vec![q("0")]);
        let again = load_network(&net.to_json().to_string()).unwrap();
        assert_eq!(again, net);
        let zero = build_sawtooth(&[], &[]).unwrap();
        assert_eq!(zero.forward(&[q("1/3")]).unwrap(), vec![q("0")]);
        assert!(build_sawtooth(&[q("1/2")], &[q("1/2")]).is_err());
    }
}
