use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Validation(String),

    #[error("unsupported regime gamma={gamma}")]
    UnsupportedRegime { gamma: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("simulation diverged at step {step} (state {value})")]
    Simulation { step: usize, value: f64 },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("unknown law_id `{0}`")]
    UnknownLaw(String),

    #[error("statistic {stat} cannot be calibrated by law `{law}`")]
    LawMismatch { stat: String, law: String },

    #[error("unsupported version {0}")]
    UnsupportedVersion(u64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code: 2 for anything the user can fix in the input, 3 for
    /// numerical breakdown.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::Simulation { .. } | Error::Estimation(_) => 3,
            _ => 2,
        }
    }
}
