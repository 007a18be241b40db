//! Seeded random models for property tests and benchmarks.
//!
//! Structures come from a random topological order with each forward pair
//! joined independently; CPT rows are uniform on the probability simplex
//! (normalized exponential draws).

use rand::seq::SliceRandom;
use rand::Rng;

use crate::action::{effect_name, ActionModel, EnvironmentModel};
use crate::cbn::ConditionalBeliefNet;
use crate::error::Result;
use crate::model::{BeliefNetwork, Cpt, Distinction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub nodes: usize,
    pub max_card: usize,
    pub arc_prob: f64,
    /// Probability that an environment node is free.
    pub free_prob: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            nodes: 8,
            max_card: 2,
            arc_prob: 0.3,
            free_prob: 0.4,
        }
    }
}

fn node_name(i: usize) -> String {
    format!("x{i:02}")
}

fn random_distinctions<R: Rng>(rng: &mut R, n: usize, max_card: usize) -> Vec<Distinction> {
    (0..n)
        .map(|i| {
            let card = rng.random_range(2..=max_card.max(2));
            Distinction::new(node_name(i), (0..card).map(|v| format!("v{v}")))
        })
        .collect()
}

/// One point uniform on the simplex of dimension `card`.
pub fn simplex_row<R: Rng>(rng: &mut R, card: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..card).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

fn random_cpt<R: Rng>(rng: &mut R, child: &Distinction, parents: &[&Distinction]) -> Cpt {
    let rows = parents.iter().map(|p| p.card()).product::<usize>();
    Cpt::new(
        child.name.clone(),
        parents.iter().map(|p| p.name.clone()).collect(),
        (0..rows).map(|_| simplex_row(rng, child.card())).collect(),
    )
}

/// Random network over `x00..`; parents are drawn from nodes earlier in a
/// shuffled order.
pub fn random_network<R: Rng>(rng: &mut R, cfg: &GenConfig) -> BeliefNetwork {
    let ds = random_distinctions(rng, cfg.nodes, cfg.max_card);
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(rng);
    let mut cpts = Vec::new();
    for (pos, &j) in order.iter().enumerate() {
        let parents: Vec<&Distinction> = order[..pos]
            .iter()
            .filter(|_| rng.random_bool(cfg.arc_prob))
            .map(|&i| &ds[i])
            .collect();
        cpts.push(random_cpt(rng, &ds[j], &parents));
    }
    let arcs: Vec<(String, String)> = cpts
        .iter()
        .flat_map(|c| c.parents.iter().map(|p| (p.clone(), c.child.clone())))
        .collect();
    BeliefNetwork::new(ds, arcs, cpts).expect("generated networks are valid")
}

/// Random environment model with at least one free node; only bound nodes
/// receive arcs.
pub fn random_environment<R: Rng>(rng: &mut R, cfg: &GenConfig) -> EnvironmentModel {
    let ds = random_distinctions(rng, cfg.nodes.max(1), cfg.max_card);
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(rng);
    let mut free: Vec<bool> = (0..ds.len()).map(|_| rng.random_bool(cfg.free_prob)).collect();
    free[order[0]] = true;
    let mut cpts = Vec::new();
    for (pos, &j) in order.iter().enumerate() {
        if free[j] {
            continue;
        }
        let parents: Vec<&Distinction> = order[..pos]
            .iter()
            .filter(|_| rng.random_bool(cfg.arc_prob))
            .map(|&i| &ds[i])
            .collect();
        cpts.push(random_cpt(rng, &ds[j], &parents));
    }
    let arcs: Vec<(String, String)> = cpts
        .iter()
        .flat_map(|c| c.parents.iter().map(|p| (p.clone(), c.child.clone())))
        .collect();
    let (f, b): (Vec<_>, Vec<_>) = ds.into_iter().enumerate().partition(|(i, _)| free[*i]);
    let cbn = ConditionalBeliefNet::new(
        f.into_iter().map(|(_, d)| d),
        b.into_iter().map(|(_, d)| d),
        arcs,
        cpts,
    )
    .expect("generated CBNs are valid");
    EnvironmentModel::new(cbn).expect("generated names are plain")
}

/// Random prior over the free nodes of `env`.
pub fn random_prior<R: Rng>(rng: &mut R, env: &EnvironmentModel, arc_prob: f64) -> BeliefNetwork {
    let mut free: Vec<&Distinction> = env.cbn().free().collect();
    free.shuffle(rng);
    let mut cpts = Vec::new();
    for pos in 0..free.len() {
        let parents: Vec<&Distinction> = free[..pos]
            .iter()
            .copied()
            .filter(|_| rng.random_bool(arc_prob))
            .collect();
        cpts.push(random_cpt(rng, free[pos], &parents));
    }
    let arcs: Vec<(String, String)> = cpts
        .iter()
        .flat_map(|c| c.parents.iter().map(|p| (p.clone(), c.child.clone())))
        .collect();
    BeliefNetwork::new(free.into_iter().cloned().collect::<Vec<_>>(), arcs, cpts)
        .expect("generated priors are valid")
}

/// Random action whose effects are free in `env` (so it is compatible).
/// Effects read a random subset of the ontology and may depend on earlier
/// effects.
pub fn random_compatible_action<R: Rng>(
    rng: &mut R,
    env: &EnvironmentModel,
    name: &str,
    qual_prob: f64,
) -> Result<ActionModel> {
    let mut free: Vec<&Distinction> = env.cbn().free().collect();
    free.shuffle(rng);
    let n_eff = rng.random_range(1..=free.len().min(2));
    let effects: Vec<&Distinction> = free[..n_eff].to_vec();
    let qual: Vec<&Distinction> = env.ontology().filter(|_| rng.random_bool(qual_prob)).collect();
    random_action(rng, name, &qual, &effects)
}

/// Action with the given qual and eff sets; each effect depends on every
/// qual node with probability 1/2 and on earlier effects likewise.
pub fn random_action<R: Rng>(
    rng: &mut R,
    name: &str,
    qual: &[&Distinction],
    effects: &[&Distinction],
) -> Result<ActionModel> {
    let marked: Vec<Distinction> = effects.iter().map(|d| d.renamed(effect_name(&d.name))).collect();
    let mut cpts = Vec::new();
    for (i, e) in marked.iter().enumerate() {
        let parents: Vec<&Distinction> = qual
            .iter()
            .copied()
            .chain(marked[..i].iter())
            .filter(|_| rng.random_bool(0.5))
            .collect();
        cpts.push(random_cpt(rng, e, &parents));
    }
    let arcs: Vec<(String, String)> = cpts
        .iter()
        .flat_map(|c| c.parents.iter().map(|p| (p.clone(), c.child.clone())))
        .collect();
    let cbn = ConditionalBeliefNet::new(qual.iter().map(|d| (*d).clone()), marked, arcs, cpts)?;
    ActionModel::new(name, cbn, false)
}
