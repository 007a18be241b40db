//! Joint-preserving graph surgery: arc reversal and node removal.
//!
//! Reversing `u -> v` gives both endpoints the union of their former parents
//! (and `v` becomes a parent of `u`); the new tables come from Bayes' rule on
//! the local product `P(u | pa(u)) P(v | pa(v))`. A node is removed by
//! reversing its outgoing arcs, children in topological order, until it is
//! barren, then deleting it.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::factor::FactorTable;
use crate::graph::{has_indirect_path, topological_order};
use crate::model::BeliefNetwork;

pub fn reverse_arc(bn: &BeliefNetwork, u: &str, v: &str) -> Result<BeliefNetwork> {
    bn.distinction(u)?;
    bn.distinction(v)?;
    if !bn.has_arc(u, v) {
        return Err(Error::ArcAbsent(u.to_string(), v.to_string()));
    }
    if has_indirect_path(bn, u, v) {
        return Err(Error::ReversalCreatesCycle(u.to_string(), v.to_string()));
    }

    let cpt_u = bn.cpt(u)?;
    let cpt_v = bn.cpt(v)?;
    let pa_u: Vec<String> = cpt_u.parents.clone();
    let pa_v: Vec<String> = cpt_v.parents.iter().filter(|p| *p != u).cloned().collect();

    let mut v_parents = pa_v.clone();
    v_parents.extend(pa_u.iter().filter(|p| !pa_v.contains(p)).cloned());
    let mut u_parents = pa_u.clone();
    u_parents.extend(pa_v.iter().filter(|p| !pa_u.contains(p)).cloned());
    u_parents.push(v.to_string());

    let local = FactorTable::from_cpt(cpt_u, bn)?.product(&FactorTable::from_cpt(cpt_v, bn)?);
    let new_v = local.sum_out(u).to_cpt(v, &v_parents)?;
    let new_u = local.to_cpt(u, &u_parents)?;

    let mut out = bn.clone();
    out.replace_cpt(new_v);
    out.replace_cpt(new_u);
    Ok(out)
}

/// Marginalizes `d` out of the network.
pub fn remove_node(bn: &BeliefNetwork, d: &str) -> Result<BeliefNetwork> {
    bn.distinction(d)?;
    let mut out = bn.clone();
    loop {
        let children: BTreeSet<&str> = out.children(d).into_iter().collect();
        if children.is_empty() {
            break;
        }
        let first = topological_order(&out)?
            .into_iter()
            .find(|n| children.contains(n.as_str()))
            .expect("children appear in the order");
        out = reverse_arc(&out, d, &first)?;
    }
    out.delete_barren(d);
    Ok(out)
}

/// Removes every node of `ds`, latest in topological order first.
pub fn remove_nodes<S: AsRef<str>>(bn: &BeliefNetwork, ds: &[S]) -> Result<BeliefNetwork> {
    let targets: BTreeSet<&str> = ds.iter().map(AsRef::as_ref).collect();
    for n in &targets {
        bn.distinction(n)?;
    }
    let order: Vec<String> = topological_order(bn)?
        .into_iter()
        .filter(|n| targets.contains(n.as_str()))
        .rev()
        .collect();
    let mut out = bn.clone();
    for n in &order {
        out = remove_node(&out, n)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::joint_probability;
    use crate::model::{combinations, Assignment};

    fn copy_pair() -> BeliefNetwork {
        BeliefNetwork::builder()
            .node("A", ["x", "y"])
            .node("B", ["x", "y"])
            .cpt("A", &[], vec![vec![0.5, 0.5]])
            .cpt("B", &["A"], vec![vec![1.0, 0.0], vec![0.0, 1.0]])
            .build()
            .unwrap()
    }

    #[test]
    fn reversing_a_deterministic_copy() {
        let r = reverse_arc(&copy_pair(), "A", "B").unwrap();
        assert!(r.has_arc("B", "A"));
        assert!(!r.has_arc("A", "B"));
        assert_eq!(r.cpt("B").unwrap().rows, vec![vec![0.5, 0.5]]);
        assert_eq!(r.cpt("A").unwrap().rows, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(r.validate().is_valid());
    }

    #[test]
    fn reversal_errors() {
        let bn = copy_pair();
        assert!(matches!(reverse_arc(&bn, "B", "A"), Err(Error::ArcAbsent(..))));
        let tri = BeliefNetwork::builder()
            .node("a", ["0", "1"])
            .node("b", ["0", "1"])
            .node("c", ["0", "1"])
            .cpt("a", &[], vec![vec![0.5, 0.5]])
            .cpt("b", &["a"], vec![vec![0.5, 0.5]; 2])
            .cpt("c", &["a", "b"], vec![vec![0.5, 0.5]; 4])
            .build()
            .unwrap();
        assert!(matches!(
            reverse_arc(&tri, "a", "c"),
            Err(Error::ReversalCreatesCycle(..))
        ));
        assert!(reverse_arc(&tri, "a", "b").is_ok());
    }

    #[test]
    fn zero_mass_rows_become_uniform() {
        // B never takes value y, so A | B=y is undefined.
        let bn = BeliefNetwork::builder()
            .node("A", ["x", "y"])
            .node("B", ["x", "y"])
            .cpt("A", &[], vec![vec![0.25, 0.75]])
            .cpt("B", &["A"], vec![vec![1.0, 0.0], vec![1.0, 0.0]])
            .build()
            .unwrap();
        let r = reverse_arc(&bn, "A", "B").unwrap();
        assert_eq!(r.cpt("A").unwrap().rows[1], vec![0.5, 0.5]);
        assert!(r.validate().is_valid());
    }

    #[test]
    fn barren_removal_keeps_other_tables() {
        let bn = copy_pair();
        let r = remove_node(&bn, "B").unwrap();
        assert_eq!(r.cpt("A").unwrap(), bn.cpt("A").unwrap());
        assert_eq!(r.len(), 1);
        let empty = remove_node(&r, "A").unwrap();
        assert!(empty.is_empty());
        assert!(matches!(remove_node(&bn, "Z"), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn removing_the_middle_of_a_chain() {
        let bn = BeliefNetwork::builder()
            .node("A", ["0", "1"])
            .node("B", ["0", "1"])
            .node("C", ["0", "1"])
            .cpt("A", &[], vec![vec![0.3, 0.7]])
            .cpt("B", &["A"], vec![vec![0.9, 0.1], vec![0.2, 0.8]])
            .cpt("C", &["B"], vec![vec![0.6, 0.4], vec![0.25, 0.75]])
            .build()
            .unwrap();
        let r = remove_node(&bn, "B").unwrap();
        assert!(r.has_arc("A", "C"));
        // P(C | A) = sum_b P(C | b) P(b | A)
        let rows = &r.cpt("C").unwrap().rows;
        let expect = [
            0.9 * 0.6 + 0.1 * 0.25,
            0.2 * 0.6 + 0.8 * 0.25,
        ];
        assert!((rows[0][0] - expect[0]).abs() < 1e-12);
        assert!((rows[1][0] - expect[1]).abs() < 1e-12);
    }

    #[test]
    fn remove_nodes_edge_cases() {
        let bn = copy_pair();
        assert_eq!(remove_nodes(&bn, &[] as &[&str]).unwrap(), bn);
        assert!(remove_nodes(&bn, &["A", "B"]).unwrap().is_empty());
    }

    #[test]
    fn remove_root_with_two_children_preserves_joint() {
        let bn = BeliefNetwork::builder()
            .node("r", ["0", "1"])
            .node("a", ["0", "1"])
            .node("b", ["0", "1", "2"])
            .cpt("r", &[], vec![vec![0.4, 0.6]])
            .cpt("a", &["r"], vec![vec![0.7, 0.3], vec![0.1, 0.9]])
            .cpt("b", &["r", "a"], vec![
                vec![0.2, 0.3, 0.5],
                vec![0.6, 0.2, 0.2],
                vec![0.1, 0.1, 0.8],
                vec![0.3, 0.3, 0.4],
            ])
            .build()
            .unwrap();
        let r = remove_node(&bn, "r").unwrap();
        for combo in combinations(&[2, 3]) {
            let mut expect = 0.0;
            for rv in ["0", "1"] {
                expect += joint_probability(
                    &bn,
                    &Assignment::from_pairs([
                        ("r", rv),
                        ("a", &combo[0].to_string()),
                        ("b", &combo[1].to_string()),
                    ]),
                )
                .unwrap();
            }
            let got = joint_probability(
                &r,
                &Assignment::from_pairs([("a", combo[0].to_string()), ("b", combo[1].to_string())]),
            )
            .unwrap();
            assert!((got - expect).abs() < 1e-12);
        }
    }
}
