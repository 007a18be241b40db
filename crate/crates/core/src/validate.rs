//! Structural validation of networks and their CPTs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::graph::find_cycle;
use crate::model::{combinations, BeliefNetwork, Cpt, Distinction};
use crate::PROB_TOL;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyName,
    DomainTooSmall { node: String, size: usize },
    DuplicateValue { node: String, value: String },
    DanglingArc { from: String, to: String },
    Cycle { nodes: Vec<String> },
    MissingCpt { node: String },
    CptForUnknownNode { node: String },
    UnknownParent { node: String, parent: String },
    DuplicateParent { node: String, parent: String },
    ParentMismatch { node: String, cpt_parents: Vec<String>, arc_parents: Vec<String> },
    RowCount { node: String, expected: usize, found: usize },
    RowLength { node: String, row: usize, expected: usize, found: usize },
    OutOfRange { node: String, row: usize, value: f64 },
    NotNormalized { node: String, row: usize, sum: f64 },
    /// CBN-specific: an arc terminating at a free node.
    ArcIntoFree { from: String, to: String },
    /// CBN-specific: a free node carrying a CPT.
    CptOnFree { node: String },
    /// CBN-specific: a name declared both free and bound.
    FreeBoundOverlap { node: String },
}

impl Violation {
    /// Node the violation is about, when there is a single one.
    pub fn node(&self) -> Option<&str> {
        use Violation::*;
        match self {
            DomainTooSmall { node, .. }
            | DuplicateValue { node, .. }
            | MissingCpt { node }
            | CptForUnknownNode { node }
            | UnknownParent { node, .. }
            | DuplicateParent { node, .. }
            | ParentMismatch { node, .. }
            | RowCount { node, .. }
            | RowLength { node, .. }
            | OutOfRange { node, .. }
            | NotNormalized { node, .. }
            | CptOnFree { node }
            | FreeBoundOverlap { node } => Some(node),
            ArcIntoFree { to, .. } => Some(to),
            EmptyName | DanglingArc { .. } | Cycle { .. } => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            EmptyName => write!(f, "a distinction has an empty name"),
            DomainTooSmall { node, size } => {
                write!(f, "{node}: domain has {size} value(s), need at least 2")
            }
            DuplicateValue { node, value } => write!(f, "{node}: duplicate domain value `{value}`"),
            DanglingArc { from, to } => write!(f, "arc {from} -> {to} names an unknown node"),
            Cycle { nodes } => write!(f, "cycle through {}", nodes.join(" -> ")),
            MissingCpt { node } => write!(f, "{node}: missing CPT"),
            CptForUnknownNode { node } => write!(f, "CPT for unknown node `{node}`"),
            UnknownParent { node, parent } => write!(f, "{node}: CPT parent `{parent}` is unknown"),
            DuplicateParent { node, parent } => write!(f, "{node}: parent `{parent}` listed twice"),
            ParentMismatch {
                node,
                cpt_parents,
                arc_parents,
            } => write!(
                f,
                "{node}: CPT parents {cpt_parents:?} do not match incoming arcs {arc_parents:?}"
            ),
            RowCount {
                node,
                expected,
                found,
            } => write!(f, "{node}: expected {expected} CPT rows, found {found}"),
            RowLength {
                node,
                row,
                expected,
                found,
            } => write!(f, "{node}: row {row} has {found} entries, expected {expected}"),
            OutOfRange { node, row, value } => {
                write!(f, "{node}: row {row} has entry {value} outside [0, 1]")
            }
            NotNormalized { node, row, sum } => write!(f, "{node}: row {row} sums to {sum}"),
            ArcIntoFree { from, to } => write!(f, "arc {from} -> {to} terminates at free node"),
            CptOnFree { node } => write!(f, "{node}: free node carries a CPT"),
            FreeBoundOverlap { node } => write!(f, "{node}: declared both free and bound"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The child's table does not depend on this parent: removing the arc
    /// leaves the factorization unchanged.
    RedundantArc { from: String, to: String },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::RedundantArc { from, to } => {
                write!(f, "arc {from} -> {to} is removable (child does not depend on it)")
            }
        }
    }
}

/// Violations make a model invalid; warnings are lint only.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty() && self.warnings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "error: {v}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

pub fn validate_network(bn: &BeliefNetwork) -> ValidationReport {
    let distinctions: BTreeMap<&str, &Distinction> =
        bn.distinctions().map(|d| (d.name.as_str(), d)).collect();
    let mut report = ValidationReport::default();
    check_distinctions(distinctions.values().copied(), &mut report.violations);
    check_arcs(bn.arcs(), &distinctions, &mut report.violations);
    for name in distinctions.keys() {
        if bn.cpt(name).is_err() {
            report.violations.push(Violation::MissingCpt {
                node: name.to_string(),
            });
        }
    }
    for cpt in bn.cpts() {
        if !distinctions.contains_key(cpt.child.as_str()) {
            report.violations.push(Violation::CptForUnknownNode {
                node: cpt.child.clone(),
            });
            continue;
        }
        check_cpt(cpt, &distinctions, bn.arcs(), &mut report);
    }
    report
}

pub(crate) fn check_distinctions<'a>(
    distinctions: impl IntoIterator<Item = &'a Distinction>,
    out: &mut Vec<Violation>,
) {
    for d in distinctions {
        if d.name.is_empty() {
            out.push(Violation::EmptyName);
        }
        if d.domain.len() < 2 {
            out.push(Violation::DomainTooSmall {
                node: d.name.clone(),
                size: d.domain.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for v in &d.domain {
            if !seen.insert(v) {
                out.push(Violation::DuplicateValue {
                    node: d.name.clone(),
                    value: v.clone(),
                });
            }
        }
    }
}

/// Dangling endpoints and cycles.
pub(crate) fn check_arcs(
    arcs: &BTreeSet<(String, String)>,
    distinctions: &BTreeMap<&str, &Distinction>,
    out: &mut Vec<Violation>,
) {
    for (from, to) in arcs {
        if !distinctions.contains_key(from.as_str()) || !distinctions.contains_key(to.as_str()) {
            out.push(Violation::DanglingArc {
                from: from.clone(),
                to: to.clone(),
            });
        }
    }
    let nodes: Vec<&str> = distinctions.keys().copied().collect();
    let known: Vec<(&str, &str)> = arcs
        .iter()
        .filter(|(a, b)| distinctions.contains_key(a.as_str()) && distinctions.contains_key(b.as_str()))
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    if let Some(cycle) = find_cycle(&nodes, &known) {
        out.push(Violation::Cycle { nodes: cycle });
    }
}

/// Parent/arc agreement, table shape, range and normalization for one CPT,
/// plus the redundant-arc lint when the table is well formed.
pub(crate) fn check_cpt(
    cpt: &Cpt,
    distinctions: &BTreeMap<&str, &Distinction>,
    arcs: &BTreeSet<(String, String)>,
    report: &mut ValidationReport,
) {
    let out = &mut report.violations;
    let before = out.len();
    let node = &cpt.child;
    let child_card = distinctions[node.as_str()].card();

    let mut seen = BTreeSet::new();
    for p in &cpt.parents {
        if !seen.insert(p) {
            out.push(Violation::DuplicateParent {
                node: node.clone(),
                parent: p.clone(),
            });
        }
        if !distinctions.contains_key(p.as_str()) {
            out.push(Violation::UnknownParent {
                node: node.clone(),
                parent: p.clone(),
            });
        }
    }
    let arc_parents: BTreeSet<&String> = arcs
        .iter()
        .filter(|(_, to)| to == node)
        .map(|(from, _)| from)
        .collect();
    let cpt_parents: BTreeSet<&String> = cpt.parents.iter().collect();
    if arc_parents != cpt_parents {
        out.push(Violation::ParentMismatch {
            node: node.clone(),
            cpt_parents: cpt.parents.clone(),
            arc_parents: arc_parents.into_iter().cloned().collect(),
        });
    }
    if out.len() > before {
        return;
    }

    let parent_cards: Vec<usize> = cpt
        .parents
        .iter()
        .map(|p| distinctions[p.as_str()].card())
        .collect();
    let expected_rows: usize = parent_cards.iter().product();
    if cpt.rows.len() != expected_rows {
        out.push(Violation::RowCount {
            node: node.clone(),
            expected: expected_rows,
            found: cpt.rows.len(),
        });
        return;
    }
    for (i, row) in cpt.rows.iter().enumerate() {
        if row.len() != child_card {
            out.push(Violation::RowLength {
                node: node.clone(),
                row: i,
                expected: child_card,
                found: row.len(),
            });
            continue;
        }
        if let Some(&bad) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            out.push(Violation::OutOfRange {
                node: node.clone(),
                row: i,
                value: bad,
            });
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL || sum.is_nan() {
            out.push(Violation::NotNormalized {
                node: node.clone(),
                row: i,
                sum,
            });
        }
    }
    if out.len() > before {
        return;
    }
    for (pos, parent) in cpt.parents.iter().enumerate() {
        if !depends_on_parent(cpt, &parent_cards, pos) {
            report.warnings.push(Warning::RedundantArc {
                from: parent.clone(),
                to: node.clone(),
            });
        }
    }
}

/// Whether the rows differ (beyond tolerance) as the parent at `pos` varies
/// with the other parents held fixed.
pub(crate) fn depends_on_parent(cpt: &Cpt, parent_cards: &[usize], pos: usize) -> bool {
    let mut others = parent_cards.to_vec();
    others[pos] = 1;
    for combo in combinations(&others) {
        let mut values = combo.clone();
        values[pos] = 0;
        let base = &cpt.rows[cpt.row_index(&values, parent_cards)];
        for v in 1..parent_cards[pos] {
            values[pos] = v;
            let row = &cpt.rows[cpt.row_index(&values, parent_cards)];
            if row.iter().zip(base).any(|(a, b)| (a - b).abs() > PROB_TOL) {
                return true;
            }
        }
    }
    false
}
