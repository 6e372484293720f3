use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] mkflow::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// Simulation blow-ups are failed runs; everything else is bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(mkflow::Error::Explosion { .. })
            | CliError::Core(mkflow::Error::PathsExploded { .. }) => 1,
            _ => 2,
        }
    }
}
