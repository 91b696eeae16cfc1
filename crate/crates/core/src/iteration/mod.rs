//! Asynchronous execution of decomposed operators.

mod operator;
mod run;
mod schedule;

pub use operator::DecomposedOperator;
pub use run::{run_async, run_sync, IterationError, RunStatus, Trajectory};
pub use schedule::{
    load_schedule, AdmissibilityBounds, SampleParams, Schedule, ScheduleError, ScheduleFile,
    ScheduleViolation,
};
