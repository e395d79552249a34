//! Library surface of the batch front end, shared by the binary and the
//! integration tests: run configuration, run-directory IO, external family
//! IO, and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod family_io;
pub mod run_io;
pub mod svg;
