//! Command-line front end for the `subeq` library.
//!
//! A run is described by a configuration file (flat `key = value` text or a
//! JSON object). Each command prints one JSON report to stdout and, with an
//! output directory, writes the same report (and for `solve` the solution
//! CSV) there.

pub mod commands;
pub mod config;
pub mod expr;

pub use commands::{exit_code, run, Failure, Outcome, EXIT_CONFIG, EXIT_INTERNAL, EXIT_OK, EXIT_UNDECIDED};
pub use config::{Command, ConfigError, RunConfig};
