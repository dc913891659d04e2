use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: wrong dimension, bad name, out-of-range argument.
    #[error("input error: {0}")]
    Input(String),
    /// A state lies outside the domain of H (e.g. a logarithm of a non-positive number).
    #[error("domain error: {0}")]
    Domain(String),
    /// An evaluation produced a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),
    /// The default skew formula was requested at a point where the gradient vanishes.
    #[error("singular point: {0}")]
    SingularPoint(String),
    /// The requested operation is not defined for this discrete gradient or energy.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Scheme, system and discrete gradient do not fit together.
    #[error("configuration error: {0}")]
    Config(String),
    /// Unknown catalog identifier.
    #[error("unknown {kind} '{name}'; available: {available}")]
    Catalog {
        kind: &'static str,
        name: String,
        available: String,
    },
    /// Stage graph is malformed.
    #[error("stage graph error: {0}")]
    Graph(String),
    /// The nonlinear solver failed.
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Evaluation(_)
                | Error::Solver { .. }
                | Error::SingularPoint(_)
                | Error::Domain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
