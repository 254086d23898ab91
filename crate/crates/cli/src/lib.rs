//! Driver for `nlnls`: scenario files, subcommands, manifests and the
//! exit-code contract (0 ok, 2 config, 3 gate, 4 convergence, 5 invariant).

pub mod cli;
pub mod commands;
pub mod config;
pub mod exit;
pub mod manifest;

pub use cli::{run, Cli};
pub use config::ScenarioConfig;
pub use exit::{CliError, ExitCode};
