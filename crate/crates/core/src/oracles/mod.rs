//! Objective functions with full and mini-batch stochastic gradient oracles.

mod fdcheck;
mod mle;
mod quadratic;

use rand::RngCore;

use crate::domain::{ParamVector, ProblemMetadata};
use crate::error::Result;

pub use fdcheck::fd_gradient_check;
pub use mle::{GaussianVarianceMle, MLE_DEFAULT_SAMPLES, MLE_FLOOR, MLE_TRUE_VARIANCE};
pub use quadratic::{InitPoint, Quadratic};

/// An objective `f(x) = (1/n) Σ F(x, ξ_i)` (or a synthetic stand-in) with
/// access to its exact gradient and an unbiased stochastic gradient.
///
/// Problems are immutable after construction; every run brings its own
/// randomness source.
pub trait Problem: Send + Sync {
    fn dim(&self) -> usize;

    fn objective(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Unbiased estimate of [`Problem::gradient`] from a batch of size `batch`.
    fn stochastic_gradient(&self, x: &[f64], batch: usize, rng: &mut dyn RngCore)
        -> Result<Vec<f64>>;

    fn metadata(&self) -> &ProblemMetadata;

    /// Number of data samples for empirical-risk problems; batch sizes are
    /// capped at this value.
    fn dataset_size(&self) -> Option<usize> {
        None
    }

    /// Maps `x` back into the feasible set in place. Returns `false` when the
    /// problem is unconstrained.
    fn project(&self, _x: &mut [f64]) -> bool {
        false
    }

    /// Problem-specific accuracy measure recorded alongside each iterate.
    fn error_metric(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Default starting point. Problems that start at a fixed point ignore `rng`.
    fn initial_point(&self, rng: &mut dyn RngCore) -> ParamVector;

    fn name(&self) -> &str;
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(crate::Error::contract(format!(
            "point has dimension {}, problem has {expected}",
            x.len()
        )))
    }
}
