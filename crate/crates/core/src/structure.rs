//! Vocabularies and weighted finite structures.

use std::collections::{BTreeSet, HashMap};

use crate::lifted::LiftedRational;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("symbol `{0}` is declared more than once")]
    SymbolClash(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` has arity {expected}, got a tuple of length {got}")]
    Arity {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("element index {0} is outside the domain")]
    UnknownElement(usize),
    #[error("constant `{0}` has no interpretation")]
    UnassignedConstant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Relation(usize),
    Constant,
    Weight(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    relations: Vec<(String, usize)>,
    constants: Vec<String>,
    weights: Vec<(String, usize)>,
    index: HashMap<String, SymbolKind>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    fn declare(&mut self, name: &str, kind: SymbolKind) -> Result<(), StructureError> {
        if self.index.contains_key(name) {
            return Err(StructureError::SymbolClash(name.to_string()));
        }
        self.index.insert(name.to_string(), kind);
        Ok(())
    }

    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<(), StructureError> {
        self.declare(name, SymbolKind::Relation(arity))?;
        self.relations.push((name.to_string(), arity));
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str) -> Result<(), StructureError> {
        self.declare(name, SymbolKind::Constant)?;
        self.constants.push(name.to_string());
        Ok(())
    }

    pub fn add_weight(&mut self, name: &str, arity: usize) -> Result<(), StructureError> {
        self.declare(name, SymbolKind::Weight(arity))?;
        self.weights.push((name.to_string(), arity));
        Ok(())
    }

    pub fn kind(&self, name: &str) -> Option<SymbolKind> {
        self.index.get(name).copied()
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn weights(&self) -> &[(String, usize)] {
        &self.weights
    }
}

/// Sparse interpretation of a weight symbol.
///
/// `scope` restricts where `default` applies: tuples containing an element
/// outside the half-open index range evaluate to `⊥`.
#[derive(Debug, Clone)]
struct WeightTable {
    default: LiftedRational,
    entries: HashMap<Vec<ElementId>, LiftedRational>,
    scope: Option<(usize, usize)>,
}

impl WeightTable {
    fn get(&self, tuple: &[ElementId]) -> LiftedRational {
        if let Some(v) = self.entries.get(tuple) {
            return v.clone();
        }
        if let Some((lo, hi)) = self.scope {
            if tuple.iter().any(|e| e.0 < lo || e.0 >= hi) {
                return LiftedRational::Bottom;
            }
        }
        self.default.clone()
    }
}

#[derive(Debug, Clone)]
pub struct WeightedStructure {
    vocabulary: Vocabulary,
    domain: Vec<String>,
    relations: HashMap<String, BTreeSet<Vec<ElementId>>>,
    constants: HashMap<String, ElementId>,
    weights: HashMap<String, WeightTable>,
}

impl WeightedStructure {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn domain_size(&self) -> usize {
        self.domain.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> {
        (0..self.domain.len()).map(ElementId)
    }

    pub fn label(&self, e: ElementId) -> &str {
        &self.domain[e.0]
    }

    pub fn element_by_label(&self, label: &str) -> Option<ElementId> {
        self.domain.iter().position(|l| l == label).map(ElementId)
    }

    pub fn holds(&self, relation: &str, tuple: &[ElementId]) -> bool {
        self.relations
            .get(relation)
            .is_some_and(|s| s.contains(tuple))
    }

    pub fn relation_tuples(&self, relation: &str) -> impl Iterator<Item = &Vec<ElementId>> {
        self.relations.get(relation).into_iter().flatten()
    }

    pub fn constant(&self, name: &str) -> Option<ElementId> {
        self.constants.get(name).copied()
    }

    /// Value of a weight symbol on a tuple; unknown symbols evaluate to `⊥`.
    pub fn weight(&self, symbol: &str, tuple: &[ElementId]) -> LiftedRational {
        self.weights
            .get(symbol)
            .map_or(LiftedRational::Bottom, |t| t.get(tuple))
    }

    /// A copy extended with fresh 0-ary weight symbols.
    pub fn with_weight_constants(
        &self,
        values: &[(String, LiftedRational)],
    ) -> Result<WeightedStructure, StructureError> {
        let mut out = self.clone();
        for (name, v) in values {
            out.vocabulary.add_weight(name, 0)?;
            let mut entries = HashMap::new();
            entries.insert(Vec::new(), v.clone());
            out.weights.insert(
                name.clone(),
                WeightTable {
                    default: LiftedRational::Bottom,
                    entries,
                    scope: None,
                },
            );
        }
        Ok(out)
    }
}

/// Incremental construction of a [`WeightedStructure`].
#[derive(Debug, Clone)]
pub struct StructureBuilder {
    inner: WeightedStructure,
}

impl StructureBuilder {
    pub fn new(vocabulary: Vocabulary, domain: Vec<String>) -> Self {
        let mut weights = HashMap::new();
        for (name, _) in vocabulary.weights() {
            weights.insert(
                name.clone(),
                WeightTable {
                    default: LiftedRational::Bottom,
                    entries: HashMap::new(),
                    scope: None,
                },
            );
        }
        let relations = vocabulary
            .relations()
            .iter()
            .map(|(n, _)| (n.clone(), BTreeSet::new()))
            .collect();
        StructureBuilder {
            inner: WeightedStructure {
                vocabulary,
                domain,
                relations,
                constants: HashMap::new(),
                weights,
            },
        }
    }

    fn check_tuple(&self, tuple: &[ElementId]) -> Result<(), StructureError> {
        match tuple.iter().find(|e| e.0 >= self.inner.domain.len()) {
            Some(e) => Err(StructureError::UnknownElement(e.0)),
            None => Ok(()),
        }
    }

    pub fn add_tuple(
        &mut self,
        relation: &str,
        tuple: Vec<ElementId>,
    ) -> Result<(), StructureError> {
        match self.inner.vocabulary.kind(relation) {
            Some(SymbolKind::Relation(k)) if k == tuple.len() => {}
            Some(SymbolKind::Relation(k)) => {
                return Err(StructureError::Arity {
                    symbol: relation.to_string(),
                    expected: k,
                    got: tuple.len(),
                })
            }
            _ => return Err(StructureError::UnknownSymbol(relation.to_string())),
        }
        self.check_tuple(&tuple)?;
        self.inner
            .relations
            .get_mut(relation)
            .expect("declared")
            .insert(tuple);
        Ok(())
    }

    pub fn set_constant(&mut self, name: &str, e: ElementId) -> Result<(), StructureError> {
        if self.inner.vocabulary.kind(name) != Some(SymbolKind::Constant) {
            return Err(StructureError::UnknownSymbol(name.to_string()));
        }
        self.check_tuple(&[e])?;
        self.inner.constants.insert(name.to_string(), e);
        Ok(())
    }

    fn table(&mut self, symbol: &str) -> Result<&mut WeightTable, StructureError> {
        self.inner
            .weights
            .get_mut(symbol)
            .ok_or_else(|| StructureError::UnknownSymbol(symbol.to_string()))
    }

    pub fn set_default(&mut self, symbol: &str, v: LiftedRational) -> Result<(), StructureError> {
        self.table(symbol)?.default = v;
        Ok(())
    }

    pub fn set_weight(
        &mut self,
        symbol: &str,
        tuple: Vec<ElementId>,
        v: LiftedRational,
    ) -> Result<(), StructureError> {
        let Some(SymbolKind::Weight(k)) = self.inner.vocabulary.kind(symbol) else {
            return Err(StructureError::UnknownSymbol(symbol.to_string()));
        };
        if k != tuple.len() {
            return Err(StructureError::Arity {
                symbol: symbol.to_string(),
                expected: k,
                got: tuple.len(),
            });
        }
        self.check_tuple(&tuple)?;
        self.table(symbol)?.entries.insert(tuple, v);
        Ok(())
    }

    pub fn build(self) -> Result<WeightedStructure, StructureError> {
        for c in self.inner.vocabulary.constants() {
            if !self.inner.constants.contains_key(c) {
                return Err(StructureError::UnassignedConstant(c.clone()));
            }
        }
        Ok(self.inner)
    }
}

/// Disjoint union with unary markers `left_marker` and `right_marker`.
///
/// Elements of `a` come first. A weight symbol of either side yields `⊥` on
/// any tuple that touches the other side.
pub fn disjoint_union(
    a: &WeightedStructure,
    b: &WeightedStructure,
    left_marker: &str,
    right_marker: &str,
) -> Result<WeightedStructure, StructureError> {
    let mut vocab = Vocabulary::new();
    for s in [a, b] {
        for (n, k) in s.vocabulary.relations() {
            vocab.add_relation(n, *k)?;
        }
        for n in s.vocabulary.constants() {
            vocab.add_constant(n)?;
        }
        for (n, k) in s.vocabulary.weights() {
            vocab.add_weight(n, *k)?;
        }
    }
    vocab.add_relation(left_marker, 1)?;
    vocab.add_relation(right_marker, 1)?;

    let na = a.domain.len();
    let nb = b.domain.len();
    let domain = a.domain.iter().chain(b.domain.iter()).cloned().collect();
    let mut relations = HashMap::new();
    let mut constants = HashMap::new();
    let mut weights = HashMap::new();
    for (s, offset, len) in [(a, 0, na), (b, na, nb)] {
        let shift = |t: &Vec<ElementId>| {
            t.iter()
                .map(|e| ElementId(e.0 + offset))
                .collect::<Vec<_>>()
        };
        for (name, tuples) in &s.relations {
            relations.insert(
                name.clone(),
                tuples.iter().map(shift).collect::<BTreeSet<_>>(),
            );
        }
        for (name, e) in &s.constants {
            constants.insert(name.clone(), ElementId(e.0 + offset));
        }
        for (name, table) in &s.weights {
            let scope = match table.scope {
                Some((lo, hi)) => (lo + offset, hi + offset),
                None => (offset, offset + len),
            };
            weights.insert(
                name.clone(),
                WeightTable {
                    default: table.default.clone(),
                    entries: table
                        .entries
                        .iter()
                        .map(|(t, v)| (shift(t), v.clone()))
                        .collect(),
                    scope: Some(scope),
                },
            );
        }
    }
    relations.insert(
        left_marker.to_string(),
        (0..na).map(|i| vec![ElementId(i)]).collect(),
    );
    relations.insert(
        right_marker.to_string(),
        (na..na + nb).map(|i| vec![ElementId(i)]).collect(),
    );
    Ok(WeightedStructure {
        vocabulary: vocab,
        domain,
        relations,
        constants,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;

    fn small(prefix: &str, n: usize) -> WeightedStructure {
        let mut v = Vocabulary::new();
        v.add_relation(&format!("{prefix}r"), 2).unwrap();
        v.add_weight(&format!("{prefix}w"), 1).unwrap();
        let mut b = StructureBuilder::new(v, (0..n).map(|i| format!("{prefix}{i}")).collect());
        b.add_tuple(&format!("{prefix}r"), vec![ElementId(0), ElementId(n - 1)])
            .unwrap();
        b.set_default(&format!("{prefix}w"), LiftedRational::zero())
            .unwrap();
        b.set_weight(
            &format!("{prefix}w"),
            vec![ElementId(0)],
            LiftedRational::value(5),
        )
        .unwrap();
        b.build().unwrap()
    }

    #[test]
    fn union_sizes_and_markers() {
        let a = small("a", 3);
        let b = small("b", 2);
        let u = disjoint_union(&a, &b, "left", "right").unwrap();
        assert_eq!(u.domain_size(), 5);
        assert_eq!(u.relation_tuples("left").count(), 3);
        assert_eq!(u.relation_tuples("right").count(), 2);
        assert!(u.holds("br", &[ElementId(3), ElementId(4)]));
        assert!(!u.holds("ar", &[ElementId(3), ElementId(4)]));
        assert_eq!(u.weight("bw", &[ElementId(3)]), LiftedRational::value(5));
        assert_eq!(u.weight("bw", &[ElementId(4)]), LiftedRational::zero());
        assert!(u.weight("bw", &[ElementId(0)]).is_bottom());
        assert!(u.weight("aw", &[ElementId(4)]).is_bottom());
        assert_eq!(
            u.weight("aw", &[ElementId(1)]),
            LiftedRational::Value(Rational::zero())
        );
    }

    #[test]
    fn clashes_are_rejected() {
        let a = small("a", 2);
        assert_eq!(
            disjoint_union(&a, &a, "l", "r").unwrap_err(),
            StructureError::SymbolClash("ar".into())
        );
        let mut v = Vocabulary::new();
        v.add_constant("c").unwrap();
        assert!(v.add_weight("c", 0).is_err());
        let b = StructureBuilder::new(v, vec!["x".into()]);
        assert_eq!(
            b.build().unwrap_err(),
            StructureError::UnassignedConstant("c".into())
        );
    }
}
