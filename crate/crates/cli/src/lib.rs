//! Run orchestration behind the `fnls` binary.

pub mod estimate;
pub mod runner;
pub mod sweep;

pub use runner::{exit_code_for_error, exit_code_for_stop, simulate, RunSummary, SimulateOptions};
