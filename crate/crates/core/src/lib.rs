//! Adaptive stochastic gradient Langevin dynamics.
//!
//! The update
//!
//! ```text
//! x_{k+1} = x_k - η D_{k-1}^{-α/2} G(x_k) + sqrt(2η) D_{k-1}^{-β/2} e_k,   e_k ~ N(0, σ² I)
//! ```
//!
//! preconditions both the stochastic gradient `G` and the injected Gaussian
//! noise with powers of a diagonal accumulator of squared gradients `D`.
//! Full-gradient (AGLD), noise-free (ASG), SGLD and SGD variants are special
//! cases.
//!
//! The crate is organized in layers:
//!
//! - [`domain`]: iterates, the accumulator and method configuration;
//! - [`oracles`]: test problems with exact and mini-batch gradients;
//! - [`optimizers`]: step rules and the seeded run loop;
//! - [`diagnostics`]: rate fits, escape timing, trace-sum growth and the
//!   bound decomposition computed from run traces;
//! - [`harness`]: experiment documents, presets and CSV output.

pub mod diagnostics;
pub mod domain;
pub mod error;
pub mod harness;
pub mod optimizers;
pub mod oracles;
mod par;

pub use domain::{BatchSchedule, Method, MethodConfig, NoiseExponent, ParamVector, Preconditioner};
pub use error::{Error, Result};
pub use optimizers::{run, run_with, RunOptions, RunTrace, Seeds};
pub use oracles::{GaussianVarianceMle, Problem, Quadratic};
pub use par::with_jobs;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
