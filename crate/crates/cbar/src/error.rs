use std::path::{Path, PathBuf};

/// Errors of the std layer, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] cbar_core::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// The reader of our output went away, as with `cbar msd | head`.
    pub fn is_broken_pipe(&self) -> bool {
        matches!(self, CliError::Io { source, .. } if source.kind() == std::io::ErrorKind::BrokenPipe)
    }

    /// 2 config, 3 data or format, 4 feasibility.
    pub fn exit_code(&self) -> i32 {
        use cbar_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::Core(e) => match e {
                E::Infeasible { .. } | E::Composition => 4,
                E::UnknownTransform(_)
                | E::SeverityOutOfRange { .. }
                | E::MissingSeverity { .. }
                | E::UnexpectedSeverity { .. }
                | E::InvalidParam { .. } => 2,
                _ => 3,
            },
        }
    }
}
