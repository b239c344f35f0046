//! Library side of the `anosov-lab` binary, exposed so the test suites can
//! drive subcommands in-process.

pub mod commands;
pub mod config;
pub mod output;
