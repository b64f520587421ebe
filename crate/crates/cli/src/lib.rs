//! Command line surface of nlsqp: configuration files, reports and commands.

pub mod commands;
pub mod config;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] nlsqp_core::Error),
}
