//! Step rules and the seeded, budget-driven run loop.

mod run;
mod step;
mod trace;

pub use run::{run, run_with, RunOptions, Runner};
pub use step::{agld_step, asg_step, asgld_step, method_step, sgd_step, sgld_step, StepContext};
pub use trace::{format_float, read_trace_csv, Divergence, RunTrace, Seeds, TraceRecord, CSV_HEADER};
