//! Experiment runner for robust multi-task subset selection.
//!
//! Each suite runs seeded experiments over the satellite scenario or the
//! image-summarization family and writes plot-ready CSV records.

pub mod config;
pub mod criteria;
pub mod error;
pub mod records;
pub mod suites;
pub mod verify;

pub use config::{ExperimentConfig, Suite};
pub use criteria::{criteria_of, evaluate_criteria, Criteria};
pub use error::{CliError, CliResult};
pub use records::{
    moving_average, read_csv, write_csv, write_selections, Algorithm, ExperimentRecord, SelectionRecord,
};
pub use suites::{run_suite, SuiteOutput};
pub use verify::{run_verify, VerifyReport};
