use thiserror::Error;

/// Broad failure classes, used by the command-line driver to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    InputData,
    CapExceeded,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid Pauli letter {0:?}")]
    InvalidLetter(char),

    #[error("non-finite coefficient {0}")]
    NonFinite(String),

    #[error("operator is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("{what} = {value} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        value: String,
        cap: String,
    },

    #[error("invalid tensors: {0}")]
    InvalidTensors(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error("invalid term ordering: {0}")]
    InvalidOrdering(String),

    #[error("definition {0} does not exist")]
    DanglingReference(usize),

    #[error("definition {0} calls itself")]
    Cycle(usize),

    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::CapExceeded { .. } => ErrorClass::CapExceeded,
            Error::InvalidParameter(_) | Error::InvalidOrdering(_) => ErrorClass::Config,
            Error::Invariant(_)
            | Error::DanglingReference(_)
            | Error::Cycle(_)
            | Error::MalformedCircuit(_) => ErrorClass::Internal,
            _ => ErrorClass::InputData,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn cap(what: &'static str, value: impl ToString, cap: impl ToString) -> Self {
        Error::CapExceeded {
            what,
            value: value.to_string(),
            cap: cap.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
