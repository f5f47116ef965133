//! Command-line and gateway front end.

pub mod commands;
pub mod gateway;
pub mod settings;

pub use commands::{execute, inspect_line, run, Cli, CliError, Command, CONFIG_ENV};
pub use gateway::{handle_connection, serve, state_line, GatewayConfig};
pub use settings::{Settings, SettingsError};
