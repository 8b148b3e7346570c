use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),

    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("`{0}` is stochastic and needs a seed (--seed or \"seed\" in the config)")]
    MissingSeed(&'static str),

    #[error(transparent)]
    Model(#[from] orchard_duo::Error),

    #[error("cannot write output: {0}")]
    Output(String),
}

/// Machine-readable form written on failure.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse_error",
            CliError::Validation { .. } => "validation_error",
            CliError::Io { .. } => "io_error",
            CliError::MissingSeed(_) => "missing_seed",
            CliError::Model(_) => "model_error",
            CliError::Output(_) => "output_error",
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            kind: self.kind(),
            message: self.to_string(),
            field: match self {
                CliError::Validation { field, .. } => Some(field.clone()),
                _ => None,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
