//! Probabilistic action models over discrete belief networks.
//!
//! A state of belief is a [`BeliefNetwork`]. An action is a conditional
//! belief net from the qualifying distinctions it reads to the effect
//! distinctions it changes, and an environment model is a conditional belief
//! net describing how the rest of the world responds. Projection appends a
//! time slice per action and yields the successor state of belief.

pub mod action;
pub mod cbn;
pub mod error;
pub mod factor;
pub mod fixtures;
pub mod generate;
pub mod graph;
pub mod inference;
pub mod io;
pub mod model;
pub mod projection;
pub mod surgery;
pub mod validate;

/// Absolute tolerance for row sums and probability comparisons.
pub const PROB_TOL: f64 = 1e-9;

pub use action::{
    check_compatibility, check_consistency, effect_name, ActionModel, CompatibilityReport, ConsistencyReport,
    EnvironmentModel, NodeConsistency,
};
pub use cbn::{bind, validate_cbn, ConditionalBeliefNet};
pub use error::{Error, Result};
pub use factor::{Dist, FactorTable};
pub use graph::{ancestors, d_separated, descendants, topological_order};
pub use inference::{enumerate_marginal, forward_sample, joint_probability, marginal};
pub use io::{export_dot, parse_model, serialize_model, DotOptions, Model};
pub use model::{Assignment, BeliefNetwork, Cpt, Distinction};
pub use projection::{
    extract_successor, project_modified, project_original, project_sequence, ProjectionOptions, ProjectionResult,
    TimedName,
};
pub use surgery::{remove_node, remove_nodes, reverse_arc};
pub use validate::{validate_network, ValidationReport, Violation, Warning};
