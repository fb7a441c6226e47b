use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed block file: {0}")]
    Format(String),
    #[error("decode failed: {0}")]
    Decode(String),
    #[error(transparent)]
    Codec(#[from] rmfec::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Format(_) => 2,
            CliError::Decode(_) => 3,
            CliError::Codec(rmfec::Error::InvalidParams { .. }) => 1,
            CliError::Codec(_) => 2,
        }
    }
}
