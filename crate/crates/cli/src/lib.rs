//! Config-driven command-line runner for the `orchard_duo` library.
//!
//! ```text
//! orchard-duo <simulate|r0|sensitivity|optimize> --config <path> --out <dir> [--seed N] [--threads K]
//! ```

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{dispatch, Command};
pub use config::RunConfig;
pub use error::CliError;
