//! Library surface of the experiment runner: spec parsing, task execution
//! and report serialization. The binary in `main.rs` is a thin shell over
//! [`run_spec`]; keeping the logic here makes it reachable from tests and
//! fuzz targets.

pub mod report;
pub mod runner;
pub mod spec;

pub use report::{Report, ReportRow};
pub use runner::{run_spec, RunOutcome};
pub use spec::{ExperimentSpec, TaskSpec, TASK_NAMES};
