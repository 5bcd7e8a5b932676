//! Experiment driver for the OCKD spoofed-speech detection pipeline:
//! corpus generation, teacher training, student distillation, scoring,
//! EER evaluation, the loss ablation harness and DET plotting.

pub mod commands;
pub mod config;
pub mod svg;

use ockd_core::Error as CoreError;

/// Exit codes: 2 usage/config, 3 data, 4 numeric failure.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::NumericFailure { .. } => CliError::Numeric(msg),
            CoreError::InvalidConfig(_)
            | CoreError::ConfigMismatch(_)
            | CoreError::InvalidLayerMap { .. } => CliError::Usage(msg),
            _ => CliError::Data(msg),
        }
    }
}
