use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    #[error("eigensolver did not converge after {restarts} restarts (worst relative residual {residual:.3e})")]
    NoConvergence { restarts: usize, residual: f64 },

    #[error("matrix has no nonzero spectrum")]
    DegenerateSpectrum,

    #[error("walk corpus is empty")]
    EmptyCorpus,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used by the CLI's structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidNetwork(_) => "invalid_network",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::OutOfRange { .. } => "out_of_range",
            Error::NoConvergence { .. } => "no_convergence",
            Error::DegenerateSpectrum => "degenerate_spectrum",
            Error::EmptyCorpus => "empty_corpus",
            Error::Parse { .. } => "parse",
            Error::Replicate { source, .. } => source.kind(),
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
