use thiserror::Error;

/// Errors that abort a subcommand before it produces a result; they all map
/// to exit code 1 (config error). Non-convergence (2) and failed validation
/// (3) are ordinary outcomes reported through return codes, not errors.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] logsp_core::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}
