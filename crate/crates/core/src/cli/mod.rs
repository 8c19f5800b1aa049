//! Command-line layer: scenario files, CSV logs and the three commands.

pub mod commands;
pub mod config;
pub mod csv;

pub use commands::{main_with_args, Cli};
