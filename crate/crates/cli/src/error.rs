use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Code(#[from] msrcode::Error),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("checksum mismatch for shard {node}: manifest {expected:08x}, file {actual:08x}")]
    Checksum {
        node: msrcode::NodeIndex,
        expected: u32,
        actual: u32,
    },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit status: 1 usage, 2 verification failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Format(_) => 1,
            CliError::Code(e) => match e {
                msrcode::Error::Singular => 2,
                _ => 1,
            },
            CliError::Mismatch(_) | CliError::Checksum { .. } | CliError::Verification(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}
