//! Single-step update rules.
//!
//! Every rule has the form
//! `x' = x - eta_k * (D^-a ⋆ g) + sqrt(2 eta_k s2) * (D^-b ⋆ z)` with `z ~ N(0, I)`,
//! where `a`, `b` and `s2` come from the method. The noise term is skipped
//! entirely when the method injects none or the effective variance is zero,
//! so zero-noise configurations reproduce the noise-free rules bit for bit.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::domain::{diag_power_into, Method, MethodConfig, ParamVector, Preconditioner};
use crate::error::{Error, Result};

/// Loop state visible to a step rule.
pub struct StepContext<'a> {
    pub x: &'a [f64],
    /// Accumulator built from gradients strictly before this step.
    pub precond: &'a Preconditioner,
    pub k: usize,
    pub rng: &'a mut dyn RngCore,
}

fn check_inputs(ctx: &StepContext<'_>, g: &[f64]) -> Result<()> {
    if g.len() != ctx.x.len() || ctx.precond.dim() != ctx.x.len() {
        return Err(Error::contract(format!(
            "dimension mismatch: x {}, gradient {}, preconditioner {}",
            ctx.x.len(),
            g.len(),
            ctx.precond.dim()
        )));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric {
            step: ctx.k,
            msg: "non-finite gradient".into(),
        });
    }
    Ok(())
}

fn adaptive_update(
    ctx: &mut StepContext<'_>,
    g: &[f64],
    eta: f64,
    grad_exp: f64,
    noise: Option<(f64, f64)>,
) -> Result<ParamVector> {
    check_inputs(ctx, g)?;
    let d = ctx.x.len();
    let diag = ctx.precond.diag();
    let mut scale = vec![0.0; d];
    diag_power_into(diag, grad_exp, &mut scale);
    let mut next: Vec<f64> = ctx
        .x
        .iter()
        .zip(&scale)
        .zip(g)
        .map(|((xi, p), gi)| xi - eta * (p * gi))
        .collect();

    if let Some((noise_exp, sigma2)) = noise {
        if sigma2 > 0.0 {
            let amp = (2.0 * eta * sigma2).sqrt();
            diag_power_into(diag, noise_exp, &mut scale);
            for (xi, q) in next.iter_mut().zip(&scale) {
                let z: f64 = StandardNormal.sample(&mut *ctx.rng);
                *xi += amp * (q * z);
            }
        }
    }

    if let Some(pos) = next.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric {
            step: ctx.k,
            msg: format!("iterate coordinate {pos} became {}", next[pos]),
        });
    }
    Ok(ParamVector::new(next).expect("dimension >= 1"))
}

fn eta_at(config: &MethodConfig, k: usize) -> f64 {
    config.eta_schedule.eta_at(config.eta, k)
}

/// `x - eta D^(-alpha/2) G + sqrt(2 eta) D^(-beta/2) e`, `e ~ N(0, sigma2 I)`.
pub fn asgld_step(ctx: &mut StepContext<'_>, g: &[f64], config: &MethodConfig) -> Result<ParamVector> {
    let eta = eta_at(config, ctx.k);
    let noise = config
        .beta
        .value()
        .map(|b| (b / 2.0, config.sigma2));
    adaptive_update(ctx, g, eta, config.alpha / 2.0, noise)
}

/// Same rule as [`asgld_step`], fed the exact gradient.
pub fn agld_step(ctx: &mut StepContext<'_>, grad: &[f64], config: &MethodConfig) -> Result<ParamVector> {
    asgld_step(ctx, grad, config)
}

/// `x - eta D^(-alpha/2) G`.
pub fn asg_step(ctx: &mut StepContext<'_>, g: &[f64], config: &MethodConfig) -> Result<ParamVector> {
    let eta = eta_at(config, ctx.k);
    adaptive_update(ctx, g, eta, config.alpha / 2.0, None)
}

/// `x - eta G + sqrt(2 eta / u) e`, `e ~ N(0, sigma2 I)`.
///
/// Equivalent to [`asgld_step`] with `alpha = beta = 0` and variance
/// `sigma2 / u`.
pub fn sgld_step(ctx: &mut StepContext<'_>, g: &[f64], config: &MethodConfig) -> Result<ParamVector> {
    if !(config.temperature_u > 0.0) {
        return Err(Error::config("SGLD temperature must be positive"));
    }
    let eta = eta_at(config, ctx.k);
    adaptive_update(ctx, g, eta, 0.0, Some((0.0, config.sigma2 / config.temperature_u)))
}

/// Plain (mini-batch) gradient step.
pub fn sgd_step(ctx: &mut StepContext<'_>, g: &[f64], config: &MethodConfig) -> Result<ParamVector> {
    let eta = eta_at(config, ctx.k);
    adaptive_update(ctx, g, eta, 0.0, None)
}

/// Dispatches on `config.method`.
pub fn method_step(ctx: &mut StepContext<'_>, g: &[f64], config: &MethodConfig) -> Result<ParamVector> {
    match config.method {
        Method::Asgld => asgld_step(ctx, g, config),
        Method::Agld => agld_step(ctx, g, config),
        Method::Asg => asg_step(ctx, g, config),
        Method::Sgld => sgld_step(ctx, g, config),
        Method::Sgd => sgd_step(ctx, g, config),
    }
}
