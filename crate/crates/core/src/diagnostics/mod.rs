//! Rate fits, bound decomposition, trace-sum growth and saddle escape timing.

mod decomposition;
mod escape;
mod rate;
mod regression;
mod tracesum;

pub use decomposition::{decomposition, DecompositionReport};
pub use escape::{
    default_escape_threshold, escape_scaling, fit_escape_models, measure_escape, median,
    EscapeCell, EscapeFits, EscapeResult, EscapeScaling, ModelFit, SaddleFamily,
};
pub use rate::{fit_rate, fit_rate_records, RateFit, DEFAULT_WINDOW};
pub use regression::{fit_line, fit_log_log, LineFit};
pub use tracesum::{trace_sums, trace_sums_window, GrowthModel, TraceSumReport};
