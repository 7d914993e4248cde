//! Parallel runner, configuration, file formats and subcommands around `phasecorr-core`.

pub mod app;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use error::AppError;
