use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("invalid {kind} `{id}`: {message}")]
    InvalidRecord {
        kind: &'static str,
        id: String,
        message: String,
    },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error(
        "power iteration did not converge after {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{module}: {source}")]
    Context {
        module: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Prefixes the message with the module that raised it.
    pub fn within(self, module: &'static str) -> Self {
        match self {
            e @ Error::Context { .. } => e,
            e => Error::Context {
                module,
                source: Box::new(e),
            },
        }
    }

    /// 2 for configuration errors, 1 for data errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::InvalidParameter(_) | Error::InfeasibleScenario(_) => 2,
            Error::Context { source, .. } => source.exit_code(),
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
