//! Error types shared across the crate.

use thiserror::Error;

/// Construction-time validation failures for graphs, grids and measures.
#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid monotone graph: {0}")]
    Graph(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid measure: {0}")]
    Measure(String),
}

/// Failures of the regularized solves and the epsilon scheme.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error(
        "inner solve did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("scheme stalled: final Cauchy gap {gap:.3e} exceeds tolerance {tol:.3e} although inner solves converged")]
    SchemeStalled { gap: f64, tol: f64 },
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
}

/// Config-file parse errors carry file, line and field context.
#[derive(Debug, Error)]
#[error("{file}:{line}: [{section}] {field}: {message}")]
pub struct ConfigError {
    pub file: String,
    pub line: usize,
    pub section: String,
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(
        file: impl Into<String>,
        line: usize,
        section: impl Into<String>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        ConfigError {
            file: file.into(),
            line,
            section: section.into(),
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Diagnostics reject inputs that violate an operation's preconditions.
#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("rejected input: {0}")]
    RejectedInput(String),
}
