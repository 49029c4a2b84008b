//! Experiment documents, presets, batch execution and report files.
//!
//! # Document grammar
//!
//! Experiments are TOML documents with three kinds of section:
//!
//! ```toml
//! # Optional: start from a preset's method list.
//! # preset = "appendix12"
//!
//! [problem]
//! kind = "quadratic_saddle"   # or gaussian_variance_mle, convex_quadratic
//! dataset_seed = 0
//! dim = 8                     # quadratics
//! gamma = 1.0                 # saddle depth
//! lambda = 1.0                # saddle positive curvature
//! noise_std = 0.0             # oracle noise (quadratics)
//! # samples = 10000           # gaussian_variance_mle
//! # spectrum_lo, spectrum_hi  # convex_quadratic
//! # rotate = false
//!
//! [execution]
//! budget = 100
//! seeds = [1]
//! # out_dir = "out"
//! # metric_every = 1
//! # record_precond = false
//! # rate_window = 0.5
//!
//! # Optional, saddle problems only.
//! # [escape]
//! # dims = [2, 8, 32, 128, 512]
//! # replicates = 20
//! # threshold = 0.1
//!
//! [method.ASG]
//! method = "ASG"
//! alpha = 1.0
//! eta = 0.01
//! # beta (required for ASGLD and AGLD), delta, sigma2, temperature_u,
//! # eta_schedule = "constant" | "inverse_time",
//! # batch = 10 | "linear(1)" | "power(1, 0.5)",
//! # base = "ASGLD_B" to start from an appendix12 configuration.
//! ```
//!
//! Unknown keys are rejected. Manifests written by [`run_experiment`] follow
//! the same grammar plus a `[manifest]` table, so they can be run again.

mod check;
mod experiment;
mod presets;
mod refit;
mod spec;

pub use check::{self_check, CheckOutcome};
pub use experiment::{
    manifest_text, read_summary, run_experiment, trace_file_name, write_summary,
    ExperimentReport, SummaryRow, DEFAULT_OUT_DIR, MANIFEST_FILE, OUT_DIR_ENV, SUMMARY_FILE,
};
pub use presets::{
    appendix12_method, preset, APPENDIX12_BUDGET, APPENDIX12_LABELS, ESCAPE_BUDGET, PRESET_NAMES,
    RATE_GRID_BUDGET, TRACESUM_BUDGET,
};
pub use refit::refit_summary;
pub use spec::{parse_spec, serialize, EscapeSpec, ExecutionSpec, ExperimentSpec, ProblemSpec};

#[cfg(test)]
mod tests;
