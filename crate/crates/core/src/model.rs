//! Discrete belief-network representation.
//!
//! A [`BeliefNetwork`] is a set of named [`Distinction`]s, a set of arcs
//! between them and one [`Cpt`] per node. CPT rows are laid out
//! lexicographically over the parents' domain indices with the last listed
//! parent varying fastest; a parentless node has exactly one row.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::validate::{validate_network, ValidationReport};

/// A named discrete variable with a closed, ordered value domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Distinction {
    pub name: String,
    pub domain: Vec<String>,
}

impl Distinction {
    pub fn new<S: Into<String>>(name: impl Into<String>, domain: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            domain: domain.into_iter().map(Into::into).collect(),
        }
    }

    pub fn card(&self) -> usize {
        self.domain.len()
    }

    /// Index of `value` in the domain.
    pub fn index_of(&self, value: &str) -> Result<usize> {
        self.domain
            .iter()
            .position(|v| v == value)
            .ok_or_else(|| Error::UnknownValue {
                node: self.name.clone(),
                value: value.to_string(),
            })
    }

    /// Same distinction under another name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            domain: self.domain.clone(),
        }
    }
}

/// Conditional probability table `P(child | parents)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub child: String,
    pub parents: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn new(child: impl Into<String>, parents: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        Self {
            child: child.into(),
            parents,
            rows,
        }
    }

    /// Parentless table with a single row.
    pub fn prior(child: impl Into<String>, probabilities: Vec<f64>) -> Self {
        Self::new(child, Vec::new(), vec![probabilities])
    }

    /// Row index for the given parent value indices (same order as `parents`).
    pub fn row_index(&self, parent_values: &[usize], parent_cards: &[usize]) -> usize {
        debug_assert_eq!(parent_values.len(), parent_cards.len());
        parent_values
            .iter()
            .zip(parent_cards)
            .fold(0, |acc, (&v, &c)| acc * c + v)
    }
}

/// Map from distinction name to value label. A total assignment over a
/// network is a world state.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(BTreeMap<String, String>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<K: Into<String>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        Self(pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }

    pub fn set(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.0.insert(name.into(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    /// Checks every assigned name exists in `bn` and every value is in its domain.
    pub fn check_against(&self, bn: &BeliefNetwork) -> Result<()> {
        for (name, value) in self.iter() {
            bn.distinction(name)?.index_of(value)?;
        }
        Ok(())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        Self::from_pairs(iter)
    }
}

/// A DAG over distinctions plus one CPT per node.
///
/// Values built with [`BeliefNetwork::new`] or the builder are validated;
/// [`BeliefNetwork::from_parts`] accepts arbitrary candidate structures so
/// they can be inspected with [`validate_network`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BeliefNetwork {
    distinctions: BTreeMap<String, Distinction>,
    arcs: BTreeSet<(String, String)>,
    cpts: BTreeMap<String, Cpt>,
}

impl BeliefNetwork {
    /// Validating constructor.
    pub fn new(
        distinctions: impl IntoIterator<Item = Distinction>,
        arcs: impl IntoIterator<Item = (String, String)>,
        cpts: impl IntoIterator<Item = Cpt>,
    ) -> Result<Self> {
        let bn = Self::from_parts(distinctions, arcs, cpts);
        bn.checked()
    }

    /// Unchecked constructor for candidate structures.
    pub fn from_parts(
        distinctions: impl IntoIterator<Item = Distinction>,
        arcs: impl IntoIterator<Item = (String, String)>,
        cpts: impl IntoIterator<Item = Cpt>,
    ) -> Self {
        Self {
            distinctions: distinctions.into_iter().map(|d| (d.name.clone(), d)).collect(),
            arcs: arcs.into_iter().collect(),
            cpts: cpts.into_iter().map(|c| (c.child.clone(), c)).collect(),
        }
    }

    pub fn builder() -> NetworkBuilder {
        NetworkBuilder::default()
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Returns `self` if it validates, otherwise the report as an error.
    pub fn checked(self) -> Result<Self> {
        let report = validate_network(&self);
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::Invalid(report))
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_network(self)
    }

    pub fn len(&self) -> usize {
        self.distinctions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distinctions.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.distinctions.contains_key(name)
    }

    /// Node names in lexicographic order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.distinctions.keys().map(String::as_str)
    }

    pub fn distinctions(&self) -> impl Iterator<Item = &Distinction> {
        self.distinctions.values()
    }

    pub fn distinction(&self, name: &str) -> Result<&Distinction> {
        self.distinctions
            .get(name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn arcs(&self) -> &BTreeSet<(String, String)> {
        &self.arcs
    }

    pub fn has_arc(&self, from: &str, to: &str) -> bool {
        self.arcs.contains(&(from.to_string(), to.to_string()))
    }

    pub fn cpts(&self) -> impl Iterator<Item = &Cpt> {
        self.cpts.values()
    }

    pub fn cpt(&self, name: &str) -> Result<&Cpt> {
        self.cpts
            .get(name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    /// Ordered parent list of `name`, as recorded by its CPT.
    pub fn parents(&self, name: &str) -> Result<&[String]> {
        Ok(&self.cpt(name)?.parents)
    }

    /// Children of `name` in lexicographic order.
    pub fn children(&self, name: &str) -> Vec<&str> {
        self.arcs
            .iter()
            .filter(|(from, _)| from == name)
            .map(|(_, to)| to.as_str())
            .collect()
    }

    /// Domain sizes of `names`, in order.
    pub fn cards(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| self.distinction(n).map(Distinction::card))
            .collect()
    }

    /// The same network with every node renamed through `rename`.
    pub fn map_names(&self, mut rename: impl FnMut(&str) -> String) -> Self {
        let distinctions: Vec<_> = self.distinctions.values().map(|d| d.renamed(rename(&d.name))).collect();
        let arcs: Vec<_> = self
            .arcs
            .iter()
            .map(|(a, b)| (rename(a), rename(b)))
            .collect();
        let cpts: Vec<_> = self
            .cpts
            .values()
            .map(|c| Cpt {
                child: rename(&c.child),
                parents: c.parents.iter().map(|p| rename(p)).collect(),
                rows: c.rows.clone(),
            })
            .collect();
        Self::from_parts(distinctions, arcs, cpts)
    }

    /// Adds (or replaces) a node and its CPT, deriving incoming arcs from the
    /// CPT's parent list. Callers keep the result acyclic.
    pub(crate) fn insert_node(&mut self, distinction: Distinction, cpt: Cpt) {
        let name = distinction.name.clone();
        self.arcs.retain(|(_, to)| to != &name);
        for p in &cpt.parents {
            self.arcs.insert((p.clone(), name.clone()));
        }
        self.distinctions.insert(name.clone(), distinction);
        self.cpts.insert(name, cpt);
    }

    /// Replaces the CPT of an existing node, re-deriving its incoming arcs.
    pub(crate) fn replace_cpt(&mut self, cpt: Cpt) {
        let d = self.distinctions[&cpt.child].clone();
        self.insert_node(d, cpt);
    }

    /// Deletes a node with no children.
    pub(crate) fn delete_barren(&mut self, name: &str) {
        debug_assert!(self.children(name).is_empty());
        self.arcs.retain(|(_, to)| to != name);
        self.distinctions.remove(name);
        self.cpts.remove(name);
    }
}

/// Incremental network construction; arcs come from CPT parent lists.
#[derive(Debug, Default)]
pub struct NetworkBuilder {
    distinctions: Vec<Distinction>,
    cpts: Vec<Cpt>,
}

impl NetworkBuilder {
    pub fn node<S: Into<String>>(mut self, name: &str, domain: impl IntoIterator<Item = S>) -> Self {
        self.distinctions.push(Distinction::new(name, domain));
        self
    }

    pub fn cpt(mut self, child: &str, parents: &[&str], rows: Vec<Vec<f64>>) -> Self {
        self.cpts.push(Cpt::new(
            child,
            parents.iter().map(|p| p.to_string()).collect(),
            rows,
        ));
        self
    }

    pub fn build(self) -> Result<BeliefNetwork> {
        let arcs: Vec<_> = self
            .cpts
            .iter()
            .flat_map(|c| c.parents.iter().map(|p| (p.clone(), c.child.clone())))
            .collect();
        BeliefNetwork::new(self.distinctions, arcs, self.cpts)
    }
}

/// Mixed-radix counter over a list of domain sizes, last position fastest.
#[derive(Debug, Clone)]
pub(crate) struct Odometer {
    cards: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl Odometer {
    pub(crate) fn new(cards: Vec<usize>) -> Self {
        let done = cards.contains(&0);
        let current = vec![0; cards.len()];
        Self {
            cards,
            current,
            done,
        }
    }

    /// Current combination, or `None` once exhausted.
    pub(crate) fn current(&self) -> Option<&[usize]> {
        (!self.done).then_some(self.current.as_slice())
    }

    pub(crate) fn advance(&mut self) {
        for i in (0..self.cards.len()).rev() {
            self.current[i] += 1;
            if self.current[i] < self.cards[i] {
                return;
            }
            self.current[i] = 0;
        }
        self.done = true;
    }
}

/// All combinations over `cards` in lexicographic order (last fastest).
pub(crate) fn combinations(cards: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut odo = Odometer::new(cards.to_vec());
    while let Some(c) = odo.current() {
        out.push(c.to_vec());
        odo.advance();
    }
    out
}
