use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation error on `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("perplexity provider failed at token {index}: {message}")]
    Provider { index: usize, message: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("rank-deficient design: term `{term}` is aliased with earlier columns")]
    Design { term: String },

    #[error("length matching infeasible: {0}")]
    MatchingInfeasible(String),

    #[error("no ratio reaches quality floor {floor}")]
    NoThreshold { floor: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("report error: {0}")]
    Report(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(field: &str, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
