//! Domain types shared by every layer: iterates, the diagonal preconditioner
//! and method configuration.

mod config;
mod metadata;
mod precond;
mod vector;

pub use config::{
    BatchSchedule, Method, MethodConfig, NoiseExponent, StepSchedule, DEFAULT_DELTA, DEFAULT_ETA,
    DEFAULT_SIGMA2,
};
pub use metadata::ProblemMetadata;
pub use precond::Preconditioner;
pub(crate) use precond::{diag_power_into, trace_power};
pub use vector::ParamVector;
pub(crate) use vector::norm_sq;
