use std::path::Path;

use hamsim_core::ErrorClass;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    /// A failure inside the library, tagged with the stage that raised it.
    #[error("{module}: {source}")]
    Core {
        module: &'static str,
        #[source]
        source: hamsim_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(key: &str, message: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{key}: {message}"))
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit code: 2 config, 3 input data, 4 cap exceeded, 5 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Core { source, .. } => match source.class() {
                ErrorClass::Config => 2,
                ErrorClass::InputData => 3,
                ErrorClass::CapExceeded => 4,
                ErrorClass::Internal => 5,
            },
        }
    }
}

/// Tags library errors with the module they came from.
pub trait Within<T> {
    fn within(self, module: &'static str) -> CliResult<T>;
}

impl<T> Within<T> for hamsim_core::Result<T> {
    fn within(self, module: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Core { module, source })
    }
}
