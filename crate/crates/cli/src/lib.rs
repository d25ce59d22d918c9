//! Configuration, orchestration and report persistence for `gradgraph`.

pub mod config;
pub mod error;
mod ledger;
pub mod report;
pub mod run;

pub use config::{Format, RunConfig, Scenario};
pub use error::CliError;
pub use report::{emit, Report};
pub use run::{run, run_with_threads};
