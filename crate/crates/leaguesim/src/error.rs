use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value out of numeric range: {0}")]
    NumericRange(String),

    /// The dependence parameter drives a low-score correction factor
    /// negative (or to zero where a log is required).
    #[error("invalid rho {rho}: {detail}")]
    InvalidRho { rho: f64, detail: String },

    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    #[error("observed information matrix is singular or not positive definite")]
    SingularInformation,

    #[error("schedule generation failed after {attempts} attempts")]
    GenerationFailure { attempts: u32 },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("duplicate team id `{0}`")]
    DuplicateTeamId(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
