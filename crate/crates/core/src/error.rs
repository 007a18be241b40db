use thiserror::Error;

use crate::validate::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("value `{value}` is not in the domain of `{node}`")]
    UnknownValue { node: String, value: String },

    #[error("assignment does not cover node `{0}`")]
    PartialAssignment(String),

    #[error("directed cycle through {}", .0.join(", "))]
    Cycle(Vec<String>),

    #[error("node sets overlap on `{0}`")]
    OverlappingSets(String),

    #[error("evidence has probability zero")]
    ZeroProbabilityEvidence,

    #[error("enumeration over {states} joint states exceeds the oracle limit of {limit}")]
    OracleLimitExceeded { states: u128, limit: u128 },

    #[error("no arc {0} -> {1}")]
    ArcAbsent(String, String),

    #[error("reversing {0} -> {1} would create a cycle (another directed path exists)")]
    ReversalCreatesCycle(String, String),

    #[error("domain of `{node}` differs: {left:?} vs {right:?}")]
    DomainMismatch {
        node: String,
        left: Vec<String>,
        right: Vec<String>,
    },

    #[error("name sets differ: {0}")]
    NameMismatch(String),

    #[error("invalid name `{0}`")]
    InvalidName(String),

    #[error("model is invalid:\n{0}")]
    Invalid(ValidationReport),

    #[error("action `{action}` is incompatible with the environment: bound effects {}", .bound_effects.join(", "))]
    Incompatible {
        action: String,
        bound_effects: Vec<String>,
    },

    #[error("action #{index} (`{action}`): {source}")]
    SequenceStep {
        index: usize,
        action: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown model kind `{0}`")]
    UnknownKind(String),

    #[error("expected a {expected} document, found `{found}`")]
    WrongKind { expected: String, found: String },

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
}
