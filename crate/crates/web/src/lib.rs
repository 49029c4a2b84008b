//! Browser bindings: three small experiments whose outputs are flat
//! `Float64Array`s ready for canvas plotting.

use asgld_core::diagnostics::trace_sums;
use asgld_core::domain::{BatchSchedule, Method, MethodConfig};
use asgld_core::optimizers::Runner;
use asgld_core::{GaussianVarianceMle, ParamVector, Problem, Quadratic, RunOptions, Seeds};
use wasm_bindgen::prelude::*;

const MLE_SAMPLES: usize = 10_000;
const MAX_STEPS: usize = 200_000;
const MAX_DIM: usize = 4096;

fn method_config(method: &str, eta: f64, sigma2: f64, delta: f64, batch: usize) -> Result<MethodConfig, String> {
    let m: Method = method.parse().map_err(|e: asgld_core::Error| e.to_string())?;
    let cfg = match m {
        Method::Asgld => MethodConfig::asgld(eta, 1.0, 1.0),
        Method::Agld => MethodConfig::agld(eta, 0.0, 1.0),
        Method::Asg => MethodConfig::asg(eta, 1.0),
        Method::Sgld => MethodConfig::sgld(eta, 1.0),
        Method::Sgd => MethodConfig::sgd(eta),
    };
    cfg.with_sigma2(sigma2)
        .with_delta(delta)
        .with_batch(BatchSchedule::Constant(batch.max(1)))
        .validated()
        .map_err(|e| e.to_string())
}

fn check_steps(steps: usize) -> Result<(), String> {
    if steps == 0 || steps > MAX_STEPS {
        return Err(format!("steps must lie in 1..={MAX_STEPS}"));
    }
    Ok(())
}

/// Runs `method` on the variance MLE from `(1, 1)` and returns
/// `[k, x1, x2, err]` rows for every `every`-th step.
///
/// Balanced exponents are used for the adaptive methods
/// (ASGLD: α = β = 1, ASG: α = 1, AGLD: α = 0, β = 1).
#[allow(clippy::too_many_arguments)]
pub fn mle_path(
    method: &str,
    eta: f64,
    sigma2: f64,
    delta: f64,
    batch: usize,
    steps: usize,
    every: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    check_steps(steps)?;
    let every = every.max(1);
    let cfg = method_config(method, eta, sigma2, delta, batch)?;
    let p = GaussianVarianceMle::new(MLE_SAMPLES, 0).map_err(|e| e.to_string())?;
    let mut r = Runner::new(&p, &cfg, Seeds::run(0, seed), None).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(4 * (steps / every + 2));
    let push = |r: &Runner<'_>, out: &mut Vec<f64>| {
        let x = r.x();
        out.extend([r.k() as f64, x[0], x[1], p.error_metric(x).unwrap_or(f64::NAN)]);
    };
    push(&r, &mut out);
    for _ in 0..steps {
        if r.step().is_err() {
            break;
        }
        if r.k() % every == 0 || r.k() == steps {
            push(&r, &mut out);
        }
    }
    Ok(out)
}

/// Starts `method` exactly at the saddle of `-x1²/2 + Σ x_i²/2` in dimension
/// `dim` and returns `f(x_k)` for `k = 0..=steps` followed by the first step
/// with `f <= -threshold` (or `-1`).
#[allow(clippy::too_many_arguments)]
pub fn escape_curve(
    method: &str,
    dim: usize,
    eta: f64,
    sigma2: f64,
    delta: f64,
    oracle_noise: f64,
    threshold: f64,
    steps: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    check_steps(steps)?;
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(format!("dimension must lie in 2..={MAX_DIM}"));
    }
    let cfg = method_config(method, eta, sigma2, delta, 1)?;
    let q = Quadratic::uniform_saddle(dim, 1.0, 1.0)
        .and_then(|q| q.with_noise(oracle_noise))
        .map_err(|e| e.to_string())?;
    let injected = cfg.noise_exponent().is_some() && cfg.effective_sigma2() > 0.0;
    let oracle = !cfg.method.uses_full_gradient() && oracle_noise > 0.0;
    if !(injected || oracle) {
        return Err("no noise source: the saddle is a fixed point".into());
    }
    let mut r = Runner::new(&q, &cfg, Seeds::run(0, seed), Some(ParamVector::zeros(dim)))
        .map_err(|e| e.to_string())?;
    let mut f = Vec::with_capacity(steps + 2);
    f.push(0.0);
    let mut escaped = -1.0;
    for _ in 0..steps {
        if r.step().is_err() {
            break;
        }
        let v = q.objective(r.x()).map_err(|e| e.to_string())?;
        if escaped < 0.0 && v <= -threshold {
            escaped = r.k() as f64;
        }
        f.push(v);
    }
    f.push(escaped);
    Ok(f)
}

/// ASG (α = 1) on the variance MLE over `seeds` runs; returns the
/// seed-averaged `S_k` for φ = 0.5, 1 and 2 as three consecutive blocks of
/// length `steps`.
pub fn trace_sum_curves(eta: f64, delta: f64, steps: usize, seeds: u32) -> Result<Vec<f64>, String> {
    check_steps(steps)?;
    if steps < 3 || !(1..=20).contains(&seeds) {
        return Err("need at least 3 steps and 1..=20 seeds".into());
    }
    let cfg = MethodConfig::asg(eta, 1.0).with_delta(delta);
    let p = GaussianVarianceMle::new(MLE_SAMPLES, 0).map_err(|e| e.to_string())?;
    let opts = RunOptions::new(steps).with_precond();
    let traces = (1..=seeds as u64)
        .map(|s| asgld_core::run_with(&p, &cfg, Seeds::run(0, s), &opts))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * steps);
    for phi in [0.5, 1.0, 2.0] {
        let r = trace_sums(&traces, phi).map_err(|e| e.to_string())?;
        let mut s = r.sums;
        s.resize(steps, f64::NAN);
        out.extend(s);
    }
    Ok(out)
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen(js_name = mlePath)]
#[allow(clippy::too_many_arguments)]
pub fn mle_path_js(
    method: &str,
    eta: f64,
    sigma2: f64,
    delta: f64,
    batch: usize,
    steps: usize,
    every: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    mle_path(method, eta, sigma2, delta, batch, steps, every, seed as u64).map_err(js)
}

#[wasm_bindgen(js_name = escapeCurve)]
#[allow(clippy::too_many_arguments)]
pub fn escape_curve_js(
    method: &str,
    dim: usize,
    eta: f64,
    sigma2: f64,
    delta: f64,
    oracle_noise: f64,
    threshold: f64,
    steps: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    escape_curve(method, dim, eta, sigma2, delta, oracle_noise, threshold, steps, seed as u64).map_err(js)
}

#[wasm_bindgen(js_name = traceSumCurves)]
pub fn trace_sum_curves_js(eta: f64, delta: f64, steps: usize, seeds: u32) -> Result<Vec<f64>, JsError> {
    trace_sum_curves(eta, delta, steps, seeds).map_err(js)
}
