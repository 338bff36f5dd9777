//! Configuration and subcommands behind the `qrevival` binary.

pub mod app;
pub mod config;

pub use app::{run, Command};
pub use config::RunConfig;
