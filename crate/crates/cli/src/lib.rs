//! Library side of the `fep` binary: argument types, subcommands and the
//! numbered property checks.

pub mod args;
pub mod checks;
pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
