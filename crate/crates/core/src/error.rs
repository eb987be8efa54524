//! Crate-wide error type.

use crate::scenario::NoSignalingReport;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("behavior table is incomplete: {count} entries missing (first: {})", first.join(", "))]
    MissingTableEntries { count: usize, first: Vec<String> },

    #[error("duplicate behavior table entry for {key}")]
    DuplicateTableEntry { key: String },

    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),

    #[error("scenario mismatch: expression is {expected}-party, behavior is {found}-party")]
    ScenarioMismatch { expected: usize, found: usize },

    #[error(
        "behavior signals beyond tolerance (max deviation {}); partial-event probabilities are context-dependent",
        report.max_deviation
    )]
    Signaling { report: NoSignalingReport },

    #[error("unknown built-in expression {0:?}")]
    UnknownBuiltin(String),

    #[error("built-in {name} is not defined for n = {n}")]
    InvalidArity { name: String, n: usize },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("LP solver failure: {0}")]
    Lp(#[from] LpError),
}

/// Numerical failures of the simplex solver, reported distinctly from an
/// ordinary infeasible (non-member) outcome.
#[derive(Debug, Error)]
pub enum LpError {
    #[error("iteration guard exceeded after {0} pivots (anti-cycling rule should make this unreachable)")]
    IterationLimit(usize),

    #[error("LP is unbounded")]
    Unbounded,

    #[error("LP is infeasible")]
    Infeasible,

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
