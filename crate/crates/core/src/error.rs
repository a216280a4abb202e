use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    /// The data do not contain the feature an analysis looks for.
    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("model evaluation failed at params {params:?}: {reason}")]
    Evaluation { params: Vec<f64>, reason: String },

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("no resonance found: {0}")]
    NoResonance(String),

    #[error("invalid fit problem: {0}")]
    Problem(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unrecognized unit `{0}`")]
    Unit(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unmet dependency: {0}")]
    UnmetDependency(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

/// Positive and finite, or a domain error naming the quantity.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(format!("{name} must be non-negative and finite, got {value}")))
    }
}
