//! Command-line front end: configuration, file formats, the verification
//! suite and the subcommands.

pub mod config;
pub mod error;
pub mod io;
pub mod sample;
pub mod verify;
pub mod commands;
pub mod report;
