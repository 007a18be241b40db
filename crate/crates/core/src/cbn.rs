//! Conditional belief networks.
//!
//! A CBN represents `P(bound | free)`: free nodes carry no table and receive
//! no arcs, bound nodes carry a CPT over their parents. Binding a prior over
//! the free nodes turns it into an ordinary [`BeliefNetwork`].

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{BeliefNetwork, Cpt, Distinction};
use crate::validate::{check_arcs, check_cpt, check_distinctions, ValidationReport, Violation};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConditionalBeliefNet {
    free: BTreeMap<String, Distinction>,
    bound: BTreeMap<String, Distinction>,
    arcs: BTreeSet<(String, String)>,
    cpts: BTreeMap<String, Cpt>,
}

impl ConditionalBeliefNet {
    /// Validating constructor.
    pub fn new(
        free: impl IntoIterator<Item = Distinction>,
        bound: impl IntoIterator<Item = Distinction>,
        arcs: impl IntoIterator<Item = (String, String)>,
        cpts: impl IntoIterator<Item = Cpt>,
    ) -> Result<Self> {
        Self::from_parts(free, bound, arcs, cpts).checked()
    }

    /// Unchecked constructor for candidate structures.
    pub fn from_parts(
        free: impl IntoIterator<Item = Distinction>,
        bound: impl IntoIterator<Item = Distinction>,
        arcs: impl IntoIterator<Item = (String, String)>,
        cpts: impl IntoIterator<Item = Cpt>,
    ) -> Self {
        Self {
            free: free.into_iter().map(|d| (d.name.clone(), d)).collect(),
            bound: bound.into_iter().map(|d| (d.name.clone(), d)).collect(),
            arcs: arcs.into_iter().collect(),
            cpts: cpts.into_iter().map(|c| (c.child.clone(), c)).collect(),
        }
    }

    pub fn checked(self) -> Result<Self> {
        let report = validate_cbn(&self);
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::Invalid(report))
        }
    }

    pub fn free(&self) -> impl Iterator<Item = &Distinction> {
        self.free.values()
    }

    pub fn bound(&self) -> impl Iterator<Item = &Distinction> {
        self.bound.values()
    }

    pub fn free_names(&self) -> BTreeSet<&str> {
        self.free.keys().map(String::as_str).collect()
    }

    pub fn bound_names(&self) -> BTreeSet<&str> {
        self.bound.keys().map(String::as_str).collect()
    }

    pub fn is_free(&self, name: &str) -> bool {
        self.free.contains_key(name)
    }

    pub fn is_bound(&self, name: &str) -> bool {
        self.bound.contains_key(name)
    }

    pub fn distinction(&self, name: &str) -> Result<&Distinction> {
        self.free
            .get(name)
            .or_else(|| self.bound.get(name))
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    /// Free and bound distinctions together, by name.
    pub fn distinctions(&self) -> impl Iterator<Item = &Distinction> {
        self.free.values().chain(self.bound.values())
    }

    pub fn arcs(&self) -> &BTreeSet<(String, String)> {
        &self.arcs
    }

    pub fn cpts(&self) -> impl Iterator<Item = &Cpt> {
        self.cpts.values()
    }

    pub fn cpt(&self, name: &str) -> Result<&Cpt> {
        self.cpts
            .get(name)
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    /// Graph view over all nodes, for structural queries. Free nodes have no
    /// table here, so the result is not a valid network.
    pub fn structure(&self) -> BeliefNetwork {
        BeliefNetwork::from_parts(
            self.distinctions().cloned().collect::<Vec<_>>(),
            self.arcs.iter().cloned(),
            self.cpts.values().cloned().collect::<Vec<_>>(),
        )
    }

    /// Same CBN with every node renamed through `rename`.
    pub fn map_names(&self, mut rename: impl FnMut(&str) -> String) -> Self {
        let free: Vec<_> = self.free.values().map(|d| d.renamed(rename(&d.name))).collect();
        let bound: Vec<_> = self.bound.values().map(|d| d.renamed(rename(&d.name))).collect();
        let arcs: Vec<_> = self.arcs.iter().map(|(a, b)| (rename(a), rename(b))).collect();
        let cpts: Vec<_> = self
            .cpts
            .values()
            .map(|c| Cpt {
                child: rename(&c.child),
                parents: c.parents.iter().map(|p| rename(p)).collect(),
                rows: c.rows.clone(),
            })
            .collect();
        Self::from_parts(free, bound, arcs, cpts)
    }
}

pub fn validate_cbn(cbn: &ConditionalBeliefNet) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_distinctions(cbn.distinctions(), &mut report.violations);

    let mut all: BTreeMap<&str, &Distinction> = BTreeMap::new();
    for d in cbn.free() {
        all.insert(&d.name, d);
    }
    for d in cbn.bound() {
        if all.insert(&d.name, d).is_some() {
            report.violations.push(Violation::FreeBoundOverlap {
                node: d.name.clone(),
            });
        }
    }
    check_arcs(cbn.arcs(), &all, &mut report.violations);
    for (from, to) in cbn.arcs() {
        if cbn.is_free(to) {
            report.violations.push(Violation::ArcIntoFree {
                from: from.clone(),
                to: to.clone(),
            });
        }
    }
    for name in cbn.bound_names() {
        if cbn.cpt(name).is_err() {
            report.violations.push(Violation::MissingCpt {
                node: name.to_string(),
            });
        }
    }
    for cpt in cbn.cpts() {
        if cbn.is_free(&cpt.child) {
            report.violations.push(Violation::CptOnFree {
                node: cpt.child.clone(),
            });
        } else if !cbn.is_bound(&cpt.child) {
            report.violations.push(Violation::CptForUnknownNode {
                node: cpt.child.clone(),
            });
        } else {
            check_cpt(cpt, &all, cbn.arcs(), &mut report);
        }
    }
    report
}

/// Checks `a` and `b` declare the same names with label-identical domains.
pub(crate) fn same_distinctions<'a>(
    a: impl IntoIterator<Item = &'a Distinction>,
    b: impl IntoIterator<Item = &'a Distinction>,
) -> Result<()> {
    let a: BTreeMap<&str, &Distinction> = a.into_iter().map(|d| (d.name.as_str(), d)).collect();
    let b: BTreeMap<&str, &Distinction> = b.into_iter().map(|d| (d.name.as_str(), d)).collect();
    let left: BTreeSet<&str> = a.keys().copied().collect();
    let right: BTreeSet<&str> = b.keys().copied().collect();
    if left != right {
        let only_left: Vec<_> = left.difference(&right).collect();
        let only_right: Vec<_> = right.difference(&left).collect();
        return Err(Error::NameMismatch(format!(
            "only on one side: {only_left:?} / {only_right:?}"
        )));
    }
    for (name, d) in &a {
        if d.domain != b[name].domain {
            return Err(Error::DomainMismatch {
                node: name.to_string(),
                left: d.domain.clone(),
                right: b[name].domain.clone(),
            });
        }
    }
    Ok(())
}

/// Adds the distribution `prior` over the free nodes, producing a network
/// over free ∪ bound whose bound tables are the CBN's, unchanged.
pub fn bind(cbn: &ConditionalBeliefNet, prior: &BeliefNetwork) -> Result<BeliefNetwork> {
    same_distinctions(cbn.free(), prior.distinctions())?;
    let distinctions: Vec<Distinction> = prior.distinctions().chain(cbn.bound()).cloned().collect();
    let arcs: Vec<(String, String)> = prior.arcs().iter().chain(cbn.arcs()).cloned().collect();
    let cpts: Vec<Cpt> = prior.cpts().chain(cbn.cpts()).cloned().collect();
    BeliefNetwork::new(distinctions, arcs, cpts)
}
