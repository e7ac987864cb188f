//! File formats, parallel evaluation and the `spikit` command for
//! [`spikit_core`].

pub mod bindings;
pub mod cli;
pub mod corpus;
pub mod dataset;
pub mod report;
pub mod runner;

pub use dataset::{load_dataset, read_dataset, Dataset, LineError, LineErrorKind};
pub use report::{emit_report, Format};
pub use runner::evaluate_parallel;
