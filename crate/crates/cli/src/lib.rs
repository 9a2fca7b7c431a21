//! Batch front end for `fraclab-core`: configuration parsing, task dispatch
//! and CSV/JSON reports.

pub mod config;
pub mod error;
pub mod report;
pub mod tasks;

pub use config::{parse_config, Format, RawConfig, RunConfig, Source, Task};
pub use error::CliError;
pub use report::Report;
pub use tasks::run_and_report;
