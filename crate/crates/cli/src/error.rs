use thiserror::Error;

/// Command failure, classified by exit code: 2 usage or configuration,
/// 3 data quality, 4 I/O.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    DataQuality(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::DataQuality(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}
