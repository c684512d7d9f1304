use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("unknown link `{0}`")]
    UnknownLink(String),

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("mass matrix is not positive definite")]
    SingularMass,

    #[error("task map is rank deficient (smallest singular value {sigma_min:e}, largest {sigma_max:e})")]
    Singularity { sigma_min: f64, sigma_max: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("parameter must be non-negative, got {0}")]
    NegativeParameter(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse error classes, used for process exit codes and the C ABI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numerical,
    Io,
    Contract,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::InvalidModel(_) | Error::InvalidCurve(_) => ErrorKind::Config,
            Error::SingularMass | Error::Singularity { .. } | Error::NonFinite(_) => ErrorKind::Numerical,
            Error::Io { .. } | Error::Csv { .. } => ErrorKind::Io,
            Error::Dimension { .. } | Error::UnknownLink(_) | Error::NegativeParameter(_) => {
                ErrorKind::Contract
            }
            Error::AtStep { source, .. } => source.kind(),
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for numerical
    /// failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Io | ErrorKind::Contract => 1,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Error {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }
}
