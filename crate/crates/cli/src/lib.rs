//! Command-line driver: configuration files, CSV outputs and run manifests.

pub mod app;
pub mod config;
pub mod error;
pub mod manifest;

pub use app::main_with;
pub use error::CliError;
