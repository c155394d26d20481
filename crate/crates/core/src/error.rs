//! Errors shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("depth cap {depth_cap} reached: cannot materialize children of a vertex at depth {at_depth}")]
    DepthCapExceeded { depth_cap: u32, at_depth: u32 },

    #[error("invalid vertex path {path:?}: {reason}")]
    InvalidPath { path: String, reason: String },

    #[error("invalid tree specification: {0}")]
    InvalidSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("query time {t} lies beyond the covered horizon {covered}")]
    QueryBeyondHorizon { t: f64, covered: f64 },

    #[error("two bars share the height {height}")]
    DuplicateHeight { height: f64 },

    #[error("bar on edge {edge} at height {height} is not useful at time {t}")]
    NotAUsefulBar { edge: String, height: f64, t: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("quadrature tolerance not met: requested {requested}, achieved {achieved}")]
    ToleranceNotMet { requested: f64, achieved: f64 },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("event budget {budget} exhausted before the requested computation finished")]
    BudgetExhausted { budget: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}
