use super::regression::fit_line;
use crate::domain::{MethodConfig, ParamVector};
use crate::error::{Error, Result};
use crate::oracles::{Problem, Quadratic};
use crate::optimizers::{Runner, Seeds};
use crate::par::par_map;

/// `0.1 γ`.
pub fn default_escape_threshold(gamma: f64) -> f64 {
    0.1 * gamma
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeResult {
    pub escaped: bool,
    pub escape_step: Option<usize>,
    pub f_drop_threshold: f64,
    pub dimension: usize,
    pub gamma: f64,
    pub seeds: Seeds,
}

fn is_stochastic(problem: &Quadratic, config: &MethodConfig) -> bool {
    let injected = config.noise_exponent().is_some() && config.effective_sigma2() > 0.0;
    let oracle = !config.method.uses_full_gradient() && problem.noise_std() > 0.0;
    injected || oracle
}

/// Runs from the saddle at the origin until `f(x_k) <= f(0) - Δ` or the
/// budget is spent. With `Δ = 0` the first strict drop below `f(0)` counts.
pub fn measure_escape(
    problem: &Quadratic,
    config: &MethodConfig,
    budget: usize,
    delta: f64,
    seeds: Seeds,
) -> Result<EscapeResult> {
    let gamma = problem
        .metadata()
        .saddle_gamma
        .ok_or_else(|| Error::config("escape runs need a saddle problem"))?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::config(format!("escape threshold must be >= 0, got {delta}")));
    }
    if budget == 0 {
        return Err(Error::config("budget must be >= 1"));
    }
    if !is_stochastic(problem, config) {
        return Err(Error::config(format!(
            "{} without injected noise or oracle noise never leaves a stationary point",
            config.method.name()
        )));
    }
    let d = problem.dim();
    let mut runner = Runner::new(problem, config, seeds, Some(ParamVector::zeros(d)))?;
    let f_saddle = problem.objective(runner.x())?;
    let level = f_saddle - delta;
    let mut escape_step = None;
    for _ in 0..budget {
        runner.step()?;
        let f = problem.objective(runner.x())?;
        if f < level || (delta > 0.0 && f == level) {
            escape_step = Some(runner.k());
            break;
        }
    }
    Ok(EscapeResult {
        escaped: escape_step.is_some(),
        escape_step,
        f_drop_threshold: delta,
        dimension: d,
        gamma,
        seeds,
    })
}

/// Saddle family indexed by dimension: eigenvalues `(-γ, λ, ..., λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleFamily {
    pub gamma: f64,
    pub lambda: f64,
    pub noise_std: f64,
}

impl SaddleFamily {
    pub fn build(&self, d: usize) -> Result<Quadratic> {
        Quadratic::uniform_saddle(d, self.gamma, self.lambda)?.with_noise(self.noise_std)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeCell {
    pub dimension: usize,
    pub replicates: usize,
    pub escaped: usize,
    /// Median escape step; `None` when any replicate failed to escape.
    pub median_step: Option<f64>,
    pub steps: Vec<Option<usize>>,
}

impl EscapeCell {
    pub fn flagged(&self) -> bool {
        self.escaped < self.replicates
    }
}

/// Least-squares fit of one model class with its relative RMS residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelFit {
    /// `a` for `a + b ln d`, `c` for `c d^p`.
    pub scale: f64,
    /// `b` for the log model, the exponent `p` for the power model.
    pub shape: f64,
    /// `sqrt(mean(((T̂ - T) / T)²))`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeFits {
    pub log_model: ModelFit,
    pub power_model: ModelFit,
}

impl EscapeFits {
    pub fn power_exponent(&self) -> f64 {
        self.power_model.shape
    }

    /// Compares both residuals; ties go to the log model.
    pub fn log_residual_not_worse(&self) -> bool {
        self.log_model.residual <= self.power_model.residual
    }
}

fn relative_rms(t: &[f64], pred: impl Iterator<Item = f64>) -> f64 {
    let s: f64 = t.iter().zip(pred).map(|(t, p)| ((p - t) / t).powi(2)).sum();
    (s / t.len() as f64).sqrt()
}

/// Fits `T ≈ a + b ln d` (least squares in `T`) and `T ≈ c d^p` (least
/// squares in `ln T`).
pub fn fit_escape_models(dims: &[f64], times: &[f64]) -> Option<EscapeFits> {
    if dims.len() != times.len() || dims.len() < 3 {
        return None;
    }
    if dims.iter().chain(times).any(|v| !(*v > 0.0)) {
        return None;
    }
    let ld: Vec<f64> = dims.iter().map(|d| d.ln()).collect();
    let lt: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let lin = fit_line(&ld, times)?;
    let pow = fit_line(&ld, &lt)?;
    let c = pow.intercept.exp();
    Some(EscapeFits {
        log_model: ModelFit {
            scale: lin.intercept,
            shape: lin.slope,
            residual: relative_rms(times, ld.iter().map(|x| lin.predict(*x))),
        },
        power_model: ModelFit {
            scale: c,
            shape: pow.slope,
            residual: relative_rms(times, ld.iter().map(|x| (pow.predict(*x)).exp())),
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeScaling {
    pub cells: Vec<EscapeCell>,
    pub threshold: f64,
    /// Fit over the unflagged dimensions; `None` with fewer than three.
    pub fits: Option<EscapeFits>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Replicate seeds are shared across dimensions: replicate `r` uses oracle
/// and noise seed `base_seed + r`.
#[allow(clippy::too_many_arguments)]
pub fn escape_scaling(
    dims: &[usize],
    family: SaddleFamily,
    config: &MethodConfig,
    replicates: usize,
    budget: usize,
    delta: f64,
    base_seed: u64,
) -> Result<EscapeScaling> {
    if replicates == 0 {
        return Err(Error::config("replicates must be >= 1"));
    }
    let lo = dims.iter().copied().min().unwrap_or(0);
    let hi = dims.iter().copied().max().unwrap_or(0);
    if lo < 2 || (hi as f64) < 16.0 * lo as f64 {
        return Err(Error::config(
            "escape dimensions must start at >= 2 and span at least 4 octaves",
        ));
    }
    let problems: Vec<Quadratic> = dims.iter().map(|&d| family.build(d)).collect::<Result<_>>()?;
    let grid: Vec<(usize, usize)> = (0..dims.len())
        .flat_map(|i| (0..replicates).map(move |r| (i, r)))
        .collect();
    let results = par_map(&grid, |&(i, r)| {
        let seed = base_seed.wrapping_add(r as u64);
        measure_escape(&problems[i], config, budget, delta, Seeds::new(0, seed, seed))
    });
    let results: Vec<EscapeResult> = results.into_iter().collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(dims.len());
    for (i, &d) in dims.iter().enumerate() {
        let steps: Vec<Option<usize>> = results[i * replicates..(i + 1) * replicates]
            .iter()
            .map(|r| r.escape_step)
            .collect();
        let escaped = steps.iter().filter(|s| s.is_some()).count();
        let median_step = if escaped == replicates {
            let mut v: Vec<f64> = steps.iter().flatten().map(|&s| s as f64).collect();
            median(&mut v)
        } else {
            None
        };
        cells.push(EscapeCell {
            dimension: d,
            replicates,
            escaped,
            median_step,
            steps,
        });
    }
    let (xs, ts): (Vec<f64>, Vec<f64>) = cells
        .iter()
        .filter_map(|c| c.median_step.map(|t| (c.dimension as f64, t)))
        .unzip();
    Ok(EscapeScaling {
        fits: fit_escape_models(&xs, &ts),
        cells,
        threshold: delta,
    })
}
