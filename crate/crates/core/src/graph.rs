//! Graph queries over a network's arc set: ordering, reachability and
//! d-separation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::model::BeliefNetwork;

/// Parent and child adjacency keyed by node name.
struct Adjacency<'a> {
    parents: BTreeMap<&'a str, Vec<&'a str>>,
    children: BTreeMap<&'a str, Vec<&'a str>>,
}

impl<'a> Adjacency<'a> {
    fn new(bn: &'a BeliefNetwork) -> Self {
        let mut parents: BTreeMap<&str, Vec<&str>> = bn.names().map(|n| (n, Vec::new())).collect();
        let mut children = parents.clone();
        for (from, to) in bn.arcs() {
            children.entry(from).or_default().push(to);
            parents.entry(to).or_default().push(from);
        }
        Self { parents, children }
    }

    fn parents(&self, n: &str) -> &[&'a str] {
        self.parents.get(n).map(Vec::as_slice).unwrap_or(&[])
    }

    fn children(&self, n: &str) -> &[&'a str] {
        self.children.get(n).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Returns the nodes of one directed cycle, in path order, if any exists.
pub(crate) fn find_cycle(nodes: &[&str], arcs: &[(&str, &str)]) -> Option<Vec<String>> {
    let mut children: BTreeMap<&str, Vec<&str>> = nodes.iter().map(|&n| (n, Vec::new())).collect();
    for &(a, b) in arcs {
        children.entry(a).or_default().push(b);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: BTreeMap<&str, u8> = BTreeMap::new();
    for &start in nodes {
        if state.get(start).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        state.insert(start, 1);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let kids = &children[node];
            if *next < kids.len() {
                let child = kids[*next];
                *next += 1;
                match state.get(child).copied().unwrap_or(0) {
                    0 => {
                        state.insert(child, 1);
                        stack.push((child, 0));
                    }
                    1 => {
                        let pos = stack.iter().position(|(n, _)| *n == child).unwrap();
                        return Some(stack[pos..].iter().map(|(n, _)| n.to_string()).collect());
                    }
                    _ => {}
                }
            } else {
                state.insert(node, 2);
                stack.pop();
            }
        }
    }
    None
}

/// Kahn's algorithm with lexicographic tie-breaking.
pub fn topological_order(bn: &BeliefNetwork) -> Result<Vec<String>> {
    let adj = Adjacency::new(bn);
    let mut indegree: BTreeMap<&str, usize> = bn.names().map(|n| (n, 0)).collect();
    for (_, to) in bn.arcs() {
        if let Some(d) = indegree.get_mut(to.as_str()) {
            *d += 1;
        }
    }
    let mut ready: BTreeSet<&str> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&n, _)| n)
        .collect();
    let mut order = Vec::with_capacity(bn.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.to_string());
        for &c in adj.children(n) {
            if let Some(d) = indegree.get_mut(c) {
                *d -= 1;
                if *d == 0 {
                    ready.insert(c);
                }
            }
        }
    }
    if order.len() < bn.len() {
        let nodes: Vec<&str> = bn.names().collect();
        let arcs: Vec<(&str, &str)> = bn
            .arcs()
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let cycle = find_cycle(&nodes, &arcs).unwrap_or_default();
        return Err(Error::Cycle(cycle));
    }
    Ok(order)
}

/// Nodes reachable from `node` by a directed path of length at least one.
pub fn descendants(bn: &BeliefNetwork, node: &str) -> Result<BTreeSet<String>> {
    bn.distinction(node)?;
    let adj = Adjacency::new(bn);
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<&str> = adj.children(node).iter().copied().collect();
    while let Some(n) = queue.pop_front() {
        if seen.insert(n.to_string()) {
            queue.extend(adj.children(n).iter().copied());
        }
    }
    Ok(seen)
}

/// Nodes with a directed path into `node`.
pub fn ancestors(bn: &BeliefNetwork, node: &str) -> Result<BTreeSet<String>> {
    bn.distinction(node)?;
    let adj = Adjacency::new(bn);
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<&str> = adj.parents(node).iter().copied().collect();
    while let Some(n) = queue.pop_front() {
        if seen.insert(n.to_string()) {
            queue.extend(adj.parents(n).iter().copied());
        }
    }
    Ok(seen)
}

/// Whether a directed path of length at least one leads from `from` to `to`
/// without using the direct arc `from -> to`.
pub(crate) fn has_indirect_path(bn: &BeliefNetwork, from: &str, to: &str) -> bool {
    let adj = Adjacency::new(bn);
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<&str> = adj.children(from).iter().copied().filter(|&c| c != to).collect();
    while let Some(n) = queue.pop_front() {
        if n == to {
            return true;
        }
        if seen.insert(n) {
            queue.extend(adj.children(n).iter().copied());
        }
    }
    false
}

/// d-separation of `x` and `y` given `z`, by the reachable-trail algorithm.
///
/// The three sets must be pairwise disjoint and name nodes of `bn`.
pub fn d_separated<S: AsRef<str>>(bn: &BeliefNetwork, x: &[S], y: &[S], z: &[S]) -> Result<bool> {
    let x: BTreeSet<&str> = x.iter().map(AsRef::as_ref).collect();
    let y: BTreeSet<&str> = y.iter().map(AsRef::as_ref).collect();
    let z: BTreeSet<&str> = z.iter().map(AsRef::as_ref).collect();
    for n in x.iter().chain(&y).chain(&z) {
        bn.distinction(n)?;
    }
    for (a, b) in [(&x, &y), (&x, &z), (&y, &z)] {
        if let Some(n) = a.intersection(b).next() {
            return Err(Error::OverlappingSets(n.to_string()));
        }
    }

    let adj = Adjacency::new(bn);

    // Z together with its ancestors: a collider is open iff it lies here.
    let mut z_anc: BTreeSet<&str> = BTreeSet::new();
    let mut queue: VecDeque<&str> = z.iter().copied().collect();
    while let Some(n) = queue.pop_front() {
        if z_anc.insert(n) {
            queue.extend(adj.parents(n).iter().copied());
        }
    }

    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum Dir {
        /// Entered from a child.
        Up,
        /// Entered from a parent.
        Down,
    }

    let mut visited: BTreeSet<(&str, Dir)> = BTreeSet::new();
    let mut queue: VecDeque<(&str, Dir)> = x.iter().map(|&n| (n, Dir::Up)).collect();
    while let Some((n, dir)) = queue.pop_front() {
        if !visited.insert((n, dir)) {
            continue;
        }
        let observed = z.contains(n);
        if !observed && y.contains(n) {
            return Ok(false);
        }
        match dir {
            Dir::Up if !observed => {
                queue.extend(adj.parents(n).iter().map(|&p| (p, Dir::Up)));
                queue.extend(adj.children(n).iter().map(|&c| (c, Dir::Down)));
            }
            Dir::Up => {}
            Dir::Down => {
                if !observed {
                    queue.extend(adj.children(n).iter().map(|&c| (c, Dir::Down)));
                }
                if z_anc.contains(n) {
                    queue.extend(adj.parents(n).iter().map(|&p| (p, Dir::Up)));
                }
            }
        }
    }
    Ok(true)
}
