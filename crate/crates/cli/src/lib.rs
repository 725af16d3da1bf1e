//! Command-line front end: configuration, run orchestration, file formats,
//! validation reports and plots.

pub mod commands;
pub mod config;
pub mod io;
pub mod plot;
pub mod scenario;

pub use commands::main_with_args;
pub use config::RunConfig;
