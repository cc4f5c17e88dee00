//! Command-line front end for the FFR throughput engine: JSON run
//! configuration, CSV/JSON outputs, parallel simulation and the acceptance
//! suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;
pub mod mcs;
pub mod output;
pub mod sim;

pub use commands::{Context, Overrides};
pub use config::RunConfig;
pub use error::{CliError, Result};
