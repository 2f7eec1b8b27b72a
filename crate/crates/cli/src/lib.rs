//! Batch driver: build, verify and estimate from a single run configuration,
//! with every artifact written as schema-tagged JSON.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod input;
pub mod runner;

pub use commands::{cmd_build, cmd_estimate, cmd_export_graph, cmd_verify, Outcome};
pub use config::RunConfig;
