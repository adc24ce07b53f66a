use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record, line {line}, field `{field}`: {message}")]
    Malformed {
        line: usize,
        field: String,
        message: String,
    },

    #[error("negative count, line {line}")]
    NegativeCount { line: usize },

    #[error("duplicate tweet id `{0}`")]
    DuplicateId(String),

    #[error("duplicate debate entry {date} ({party})")]
    DuplicateDebate { date: String, party: String },

    #[error("no tokens survive filtering")]
    EmptyCorpus,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("topic count {topics} exceeds total token count {tokens}")]
    TooManyTopics { topics: usize, tokens: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("design matrix is rank deficient; collinear columns: {}", .columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("linear predictor out of range ({0:.3} > 700)")]
    LinearPredictorOverflow(f64),

    #[error("dispersion must be positive (got {0}); use the Poisson path for alpha = 0")]
    InvalidDispersion(f64),

    #[error("covariance matrix is unreliable (Hessian not negative definite at the optimum)")]
    UnreliableCovariance,

    #[error("fits use different observation counts ({0} vs {1})")]
    MismatchedObservations(usize, usize),

    #[error("every fit in the sweep failed to converge")]
    AllFitsFailed,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("missing artifact {path}; run {stage} first")]
    MissingArtifact { stage: String, path: PathBuf },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

/// Process exit status categories used by the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Data = 2,
    Numerical = 3,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(line: usize, field: &str, message: impl Into<String>) -> Self {
        Error::Malformed {
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_kind(&self) -> ExitKind {
        match self {
            Error::InvalidConfig(_) | Error::MissingArtifact { .. } | Error::Toml(_) => {
                ExitKind::Usage
            }
            Error::TooManyTopics { .. }
            | Error::RankDeficient { .. }
            | Error::LinearPredictorOverflow(_)
            | Error::InvalidDispersion(_)
            | Error::UnreliableCovariance
            | Error::AllFitsFailed => ExitKind::Numerical,
            _ => ExitKind::Data,
        }
    }
}
