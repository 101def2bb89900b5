use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(String),

    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    /// A model violates one of the structural conditions (A.1 .. A.4) or a
    /// parameter range check.
    #[error("{condition} violated {detail}")]
    Validation { condition: String, detail: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("magnetization {m} out of range for {sites} sites")]
    MagnetizationOutOfRange { m: String, sites: usize },

    #[error("dimension {dim} exceeds budget {budget} (set NAGAOKA_DIM_BUDGET to raise it)")]
    DimensionBudget { dim: usize, budget: usize },

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("ambiguous total spin: <S^2> = {stot2}, nearest S = {s}, mismatch {mismatch:e}")]
    AmbiguousSpin { stot2: f64, s: f64, mismatch: f64 },

    #[error("positivity certificate inconsistency: {0}")]
    Inconsistent(String),

    #[error("displacement {displacement} is not an integer multiple of grid spacing {spacing}")]
    Incommensurate { displacement: f64, spacing: f64 },
}

impl Error {
    pub(crate) fn validation(condition: &str, detail: impl Into<String>) -> Self {
        Error::Validation { condition: condition.to_string(), detail: detail.into() }
    }

    /// Numerical failures (as opposed to bad input) get their own exit code
    /// in the command-line tool.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::AmbiguousSpin { .. } | Error::Inconsistent(_))
    }
}
