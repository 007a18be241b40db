//! Action models, the environment model, and the compatibility and
//! consistency checks that relate them to states.
//!
//! An action's CBN names its qualifying (preceding-state) nodes by their bare
//! distinction names and its effect (succeeding-state) nodes by the
//! distinction name followed by [`EFFECT_MARK`], so `object_location'` is the
//! location after the action. The qual and eff sets are whatever the modeler
//! supplies; nothing here tries to derive minimal ones.

use std::collections::BTreeSet;
use std::fmt;

use crate::cbn::{validate_cbn, ConditionalBeliefNet};
use crate::error::{Error, Result};
use crate::inference::marginal;
use crate::model::{combinations, Assignment, BeliefNetwork, Distinction};
use crate::projection::check_base_name;

/// Suffix marking an effect node inside an action CBN.
pub const EFFECT_MARK: char = '\'';

/// Default tolerance for [`check_consistency`].
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-6;

/// Name of the effect node for distinction `base`.
pub fn effect_name(base: &str) -> String {
    format!("{base}{EFFECT_MARK}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionModel {
    name: String,
    cbn: ConditionalBeliefNet,
    include_action_node: bool,
}

impl ActionModel {
    /// `cbn` must use bare names for its free (qual) nodes and marked names
    /// for its bound (eff) nodes.
    pub fn new(name: impl Into<String>, cbn: ConditionalBeliefNet, include_action_node: bool) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidName(name));
        }
        let report = validate_cbn(&cbn);
        if !report.is_valid() {
            return Err(Error::Invalid(report));
        }
        for q in cbn.free_names() {
            check_base_name(q)?;
        }
        for e in cbn.bound_names() {
            let base = e
                .strip_suffix(EFFECT_MARK)
                .ok_or_else(|| Error::InvalidName(e.to_string()))?;
            check_base_name(base)?;
            if let Ok(q) = cbn.distinction(base) {
                let effect = cbn.distinction(e)?;
                if q.domain != effect.domain {
                    return Err(Error::DomainMismatch {
                        node: base.to_string(),
                        left: q.domain.clone(),
                        right: effect.domain.clone(),
                    });
                }
            }
        }
        Ok(Self {
            name,
            cbn,
            include_action_node,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cbn(&self) -> &ConditionalBeliefNet {
        &self.cbn
    }

    pub fn include_action_node(&self) -> bool {
        self.include_action_node
    }

    pub fn with_action_node(mut self, on: bool) -> Self {
        self.include_action_node = on;
        self
    }

    /// qual(A): preceding-state distinctions the effects depend on.
    pub fn qual(&self) -> BTreeSet<String> {
        self.cbn.free_names().into_iter().map(str::to_string).collect()
    }

    /// eff(A): distinctions directly affected, as bare names.
    pub fn eff(&self) -> BTreeSet<String> {
        self.cbn
            .bound_names()
            .into_iter()
            .map(|e| e.trim_end_matches(EFFECT_MARK).to_string())
            .collect()
    }

    /// Declared distinctions under their bare names, one per base.
    pub fn base_distinctions(&self) -> Vec<Distinction> {
        let mut seen = BTreeSet::new();
        self.cbn
            .distinctions()
            .map(|d| d.renamed(d.name.trim_end_matches(EFFECT_MARK)))
            .filter(|d| seen.insert(d.name.clone()))
            .collect()
    }

    /// Checks every qual/eff base exists in `ontology` with the same domain.
    pub fn check_ontology<'a>(&self, ontology: impl Fn(&str) -> Option<&'a Distinction>) -> Result<()> {
        for d in self.base_distinctions() {
            let known = ontology(&d.name).ok_or_else(|| Error::UnknownNode(d.name.clone()))?;
            if known.domain != d.domain {
                return Err(Error::DomainMismatch {
                    node: d.name.clone(),
                    left: d.domain.clone(),
                    right: known.domain.clone(),
                });
            }
        }
        Ok(())
    }
}

/// The relations `P(H | F)` assumed to hold in every state; `F ∪ H` is the
/// full set of distinctions.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentModel {
    cbn: ConditionalBeliefNet,
}

impl EnvironmentModel {
    pub fn new(cbn: ConditionalBeliefNet) -> Result<Self> {
        let report = validate_cbn(&cbn);
        if !report.is_valid() {
            return Err(Error::Invalid(report));
        }
        for d in cbn.distinctions() {
            check_base_name(&d.name)?;
        }
        Ok(Self { cbn })
    }

    pub fn cbn(&self) -> &ConditionalBeliefNet {
        &self.cbn
    }

    pub fn ontology(&self) -> impl Iterator<Item = &Distinction> {
        self.cbn.distinctions()
    }

    pub fn distinction(&self, name: &str) -> Option<&Distinction> {
        self.cbn.distinction(name).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityReport {
    pub compatible: bool,
    /// Effects that are bound in the environment model.
    pub bound_effects: Vec<String>,
}

/// An action is compatible with `v` iff all its direct effects are free in `v`.
pub fn check_compatibility(a: &ActionModel, v: &EnvironmentModel) -> Result<CompatibilityReport> {
    a.check_ontology(|n| v.distinction(n))?;
    let bound_effects: Vec<String> = a.eff().into_iter().filter(|e| v.cbn.is_bound(e)).collect();
    Ok(CompatibilityReport {
        compatible: bound_effects.is_empty(),
        bound_effects,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeConsistency {
    pub node: String,
    /// Largest |P_V(h | pa) - P_W(h | pa)| over the verifiable rows.
    pub max_deviation: f64,
    pub rows_checked: usize,
    /// Parent assignments with zero probability in the state; the
    /// conditional is undefined there and they do not affect the verdict.
    pub unverifiable_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub tolerance: f64,
    pub nodes: Vec<NodeConsistency>,
}

impl ConsistencyReport {
    pub fn worst(&self) -> Option<&NodeConsistency> {
        self.nodes
            .iter()
            .max_by(|a, b| a.max_deviation.total_cmp(&b.max_deviation))
    }
}

impl fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.nodes {
            let flag = if n.max_deviation <= self.tolerance { "ok" } else { "MISMATCH" };
            write!(
                f,
                "{:<24} max deviation {:.3e} over {} row(s)  {}",
                n.node, n.max_deviation, n.rows_checked, flag
            )?;
            if !n.unverifiable_rows.is_empty() {
                write!(f, "  ({} unverifiable)", n.unverifiable_rows.len())?;
            }
            writeln!(f)?;
        }
        writeln!(
            f,
            "{} (tolerance {:e})",
            if self.consistent { "consistent" } else { "inconsistent" },
            self.tolerance
        )
    }
}

/// Compares, for every bound node `h` of `v`, the state's conditional
/// `P_W(h | pa_V(h))` against `v`'s table, row by row.
pub fn check_consistency(w: &BeliefNetwork, v: &EnvironmentModel, tol: f64) -> Result<ConsistencyReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::NameMismatch(format!("tolerance must be positive, got {tol}")));
    }
    crate::cbn::same_distinctions(w.distinctions(), v.ontology())?;

    let mut nodes = Vec::new();
    for h in v.cbn.bound_names() {
        let cpt = v.cbn.cpt(h)?;
        let mut scope = cpt.parents.clone();
        scope.push(h.to_string());
        let joint = marginal(w, &scope, &Assignment::new())?;
        let cards = joint.cards();
        let child_card = *cards.last().unwrap();
        let parent_cards = &cards[..cards.len() - 1];

        let mut report = NodeConsistency {
            node: h.to_string(),
            max_deviation: 0.0,
            rows_checked: 0,
            unverifiable_rows: Vec::new(),
        };
        for (r, _) in combinations(parent_cards).into_iter().enumerate() {
            let block = &joint.probabilities[r * child_card..(r + 1) * child_card];
            let mass: f64 = block.iter().sum();
            if mass <= 0.0 {
                report.unverifiable_rows.push(r);
                continue;
            }
            report.rows_checked += 1;
            for (p_w, p_v) in block.iter().zip(&cpt.rows[r]) {
                report.max_deviation = report.max_deviation.max((p_w / mass - p_v).abs());
            }
        }
        nodes.push(report);
    }
    let consistent = nodes.iter().all(|n| n.max_deviation <= tol);
    Ok(ConsistencyReport {
        consistent,
        tolerance: tol,
        nodes,
    })
}
