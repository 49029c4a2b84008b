use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::diagnostics::SaddleFamily;
use crate::domain::{BatchSchedule, Method, MethodConfig, NoiseExponent, StepSchedule, DEFAULT_ETA};
use crate::error::{Error, Result};
use crate::oracles::{GaussianVarianceMle, Problem, Quadratic, MLE_DEFAULT_SAMPLES};

use super::presets;

/// Test problem selected by an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    GaussianVarianceMle {
        samples: usize,
    },
    /// Eigenvalues `(-gamma, lambda, ..., lambda)` in dimension `dim`.
    QuadraticSaddle {
        dim: usize,
        gamma: f64,
        lambda: f64,
        noise_std: f64,
        rotate: bool,
    },
    /// Eigenvalues spaced evenly over `[lo, hi]`.
    ConvexQuadratic {
        dim: usize,
        lo: f64,
        hi: f64,
        noise_std: f64,
        rotate: bool,
    },
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::GaussianVarianceMle { .. } => "gaussian_variance_mle",
            ProblemSpec::QuadraticSaddle { .. } => "quadratic_saddle",
            ProblemSpec::ConvexQuadratic { .. } => "convex_quadratic",
        }
    }

    /// Instantiates the problem. `dataset_seed` draws the MLE samples or the
    /// rotation of a rotated quadratic.
    pub fn build(&self, dataset_seed: u64) -> Result<Box<dyn Problem>> {
        Ok(match *self {
            ProblemSpec::GaussianVarianceMle { samples } => {
                Box::new(GaussianVarianceMle::new(samples, dataset_seed)?)
            }
            ProblemSpec::QuadraticSaddle { .. } | ProblemSpec::ConvexQuadratic { .. } => {
                Box::new(self.build_quadratic(dataset_seed)?.expect("quadratic kind"))
            }
        })
    }

    pub fn build_quadratic(&self, dataset_seed: u64) -> Result<Option<Quadratic>> {
        let (q, rotate) = match *self {
            ProblemSpec::GaussianVarianceMle { .. } => return Ok(None),
            ProblemSpec::QuadraticSaddle {
                dim,
                gamma,
                lambda,
                noise_std,
                rotate,
            } => (
                Quadratic::uniform_saddle(dim, gamma, lambda)?.with_noise(noise_std)?,
                rotate,
            ),
            ProblemSpec::ConvexQuadratic {
                dim,
                lo,
                hi,
                noise_std,
                rotate,
            } => {
                if !(lo > 0.0 && hi >= lo) {
                    return Err(Error::config("convex spectrum needs 0 < lo <= hi"));
                }
                let spec = Quadratic::linspace_spectrum(dim, lo, hi);
                (Quadratic::convex(spec)?.with_noise(noise_std)?, rotate)
            }
        };
        Ok(Some(if rotate { q.with_rotation(dataset_seed) } else { q }))
    }

    pub fn saddle_family(&self) -> Option<SaddleFamily> {
        match *self {
            ProblemSpec::QuadraticSaddle {
                gamma,
                lambda,
                noise_std,
                ..
            } => Some(SaddleFamily {
                gamma,
                lambda,
                noise_std,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionSpec {
    pub budget: usize,
    pub seeds: Vec<u64>,
    /// `None` defers to the caller's default output directory.
    pub out_dir: Option<PathBuf>,
    pub metric_every: usize,
    pub record_precond: bool,
    /// Tail fraction used by the summary's rate fits.
    pub rate_window: f64,
}

/// Escape-time scan over saddle dimensions, run for every method.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapeSpec {
    pub dims: Vec<usize>,
    pub replicates: usize,
    /// Defaults to `0.1 γ`.
    pub threshold: Option<f64>,
    pub budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    pub dataset_seed: u64,
    pub execution: ExecutionSpec,
    pub escape: Option<EscapeSpec>,
    /// Labeled configurations in document order.
    pub methods: Vec<(String, MethodConfig)>,
}

impl ExperimentSpec {
    pub fn method(&self, label: &str) -> Option<&MethodConfig> {
        self.methods.iter().find(|(l, _)| l == label).map(|(_, c)| c)
    }

    pub fn to_toml(&self) -> String {
        serialize(self)
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    problem: RawProblem,
    execution: RawExecution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    escape: Option<RawEscape>,
    #[serde(default)]
    method: toml::Table,
    /// Written into manifests; ignored on input.
    #[serde(default, skip_serializing)]
    #[allow(dead_code)]
    manifest: Option<toml::Table>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    kind: String,
    #[serde(default)]
    dataset_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_std: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rotate: Option<bool>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawExecution {
    budget: usize,
    seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out_dir: Option<PathBuf>,
    #[serde(default = "one")]
    metric_every: usize,
    #[serde(default)]
    record_precond: bool,
    #[serde(default = "half")]
    rate_window: f64,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawEscape {
    dims: Vec<usize>,
    replicates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<usize>,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawMethod {
    #[serde(skip_serializing_if = "Option::is_none")]
    base: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_schedule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature_u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    batch: Option<RawBatch>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum RawBatch {
    Size(usize),
    Schedule(String),
}

fn one() -> usize {
    1
}

fn half() -> f64 {
    0.5
}

fn perr(context: impl Into<String>, msg: impl std::fmt::Display) -> Error {
    Error::Parse {
        context: context.into(),
        msg: msg.to_string(),
    }
}

fn reject_unused(kind: &str, fields: &[(&str, bool)]) -> Result<()> {
    for (name, present) in fields {
        if *present {
            return Err(perr(
                format!("problem.{name}"),
                format!("not a parameter of {kind}"),
            ));
        }
    }
    Ok(())
}

fn require<T>(v: Option<T>, ctx: &str) -> Result<T> {
    v.ok_or_else(|| perr(ctx, format!("missing required field `{}`", ctx.rsplit('.').next().unwrap_or(ctx))))
}

fn resolve_problem(p: &RawProblem) -> Result<ProblemSpec> {
    let spec = match p.kind.as_str() {
        "gaussian_variance_mle" => {
            reject_unused(
                &p.kind,
                &[
                    ("dim", p.dim.is_some()),
                    ("gamma", p.gamma.is_some()),
                    ("lambda", p.lambda.is_some()),
                    ("spectrum_lo", p.spectrum_lo.is_some()),
                    ("spectrum_hi", p.spectrum_hi.is_some()),
                    ("noise_std", p.noise_std.is_some()),
                    ("rotate", p.rotate.is_some()),
                ],
            )?;
            ProblemSpec::GaussianVarianceMle {
                samples: p.samples.unwrap_or(MLE_DEFAULT_SAMPLES),
            }
        }
        "quadratic_saddle" => {
            reject_unused(
                &p.kind,
                &[
                    ("samples", p.samples.is_some()),
                    ("spectrum_lo", p.spectrum_lo.is_some()),
                    ("spectrum_hi", p.spectrum_hi.is_some()),
                ],
            )?;
            ProblemSpec::QuadraticSaddle {
                dim: require(p.dim, "problem.dim")?,
                gamma: p.gamma.unwrap_or(1.0),
                lambda: p.lambda.unwrap_or(1.0),
                noise_std: p.noise_std.unwrap_or(0.0),
                rotate: p.rotate.unwrap_or(false),
            }
        }
        "convex_quadratic" => {
            reject_unused(
                &p.kind,
                &[
                    ("samples", p.samples.is_some()),
                    ("gamma", p.gamma.is_some()),
                    ("lambda", p.lambda.is_some()),
                ],
            )?;
            ProblemSpec::ConvexQuadratic {
                dim: require(p.dim, "problem.dim")?,
                lo: p.spectrum_lo.unwrap_or(1.0),
                hi: p.spectrum_hi.unwrap_or(1.0),
                noise_std: p.noise_std.unwrap_or(0.0),
                rotate: p.rotate.unwrap_or(false),
            }
        }
        other => {
            return Err(perr(
                "problem.kind",
                format!(
                    "unknown problem kind `{other}` (expected gaussian_variance_mle, quadratic_saddle or convex_quadratic)"
                ),
            ))
        }
    };
    spec.build(p.dataset_seed)
        .map_err(|e| perr("problem", e))?;
    Ok(spec)
}

fn raw_problem(spec: &ProblemSpec, dataset_seed: u64) -> RawProblem {
    let mut raw = RawProblem {
        kind: spec.kind().to_string(),
        dataset_seed,
        ..Default::default()
    };
    match *spec {
        ProblemSpec::GaussianVarianceMle { samples } => raw.samples = Some(samples),
        ProblemSpec::QuadraticSaddle {
            dim,
            gamma,
            lambda,
            noise_std,
            rotate,
        } => {
            raw.dim = Some(dim);
            raw.gamma = Some(gamma);
            raw.lambda = Some(lambda);
            raw.noise_std = Some(noise_std);
            raw.rotate = Some(rotate);
        }
        ProblemSpec::ConvexQuadratic {
            dim,
            lo,
            hi,
            noise_std,
            rotate,
        } => {
            raw.dim = Some(dim);
            raw.spectrum_lo = Some(lo);
            raw.spectrum_hi = Some(hi);
            raw.noise_std = Some(noise_std);
            raw.rotate = Some(rotate);
        }
    }
    raw
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn resolve_method(label: &str, raw: RawMethod) -> Result<MethodConfig> {
    let ctx = |field: &str| format!("method.{label}.{field}");
    let mut cfg = match &raw.base {
        Some(base) => presets::appendix12_method(base).ok_or_else(|| {
            perr(
                ctx("base"),
                format!(
                    "unknown base label `{base}` (expected one of {})",
                    presets::APPENDIX12_LABELS.join(", ")
                ),
            )
        })?,
        None => {
            let kind: Method = require(raw.method.clone(), &ctx("method"))?
                .parse()
                .map_err(|e| perr(ctx("method"), e))?;
            let alpha_needed = matches!(kind, Method::Asgld | Method::Agld | Method::Asg);
            let alpha = if alpha_needed {
                require(raw.alpha, &ctx("alpha"))?
            } else {
                0.0
            };
            let eta = raw.eta.unwrap_or(DEFAULT_ETA);
            match kind {
                Method::Asgld => MethodConfig::asgld(eta, alpha, require(raw.beta, &ctx("beta"))?),
                Method::Agld => MethodConfig::agld(eta, alpha, require(raw.beta, &ctx("beta"))?),
                Method::Asg => MethodConfig::asg(eta, alpha),
                Method::Sgld => MethodConfig::sgld(eta, 1.0),
                Method::Sgd => MethodConfig::sgd(eta),
            }
        }
    };
    if let Some(m) = &raw.method {
        let kind: Method = m.parse().map_err(|e| perr(ctx("method"), e))?;
        cfg.method = kind;
    }
    if let Some(v) = raw.eta {
        cfg.eta = v;
    }
    if let Some(s) = &raw.eta_schedule {
        cfg.eta_schedule = s.parse::<StepSchedule>().map_err(|e| perr(ctx("eta_schedule"), e))?;
    }
    if let Some(v) = raw.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = raw.beta {
        cfg.beta = NoiseExponent::Finite(v);
    }
    if let Some(v) = raw.delta {
        cfg.delta = v;
    }
    if let Some(v) = raw.sigma2 {
        cfg.sigma2 = v;
    }
    if let Some(v) = raw.temperature_u {
        cfg.temperature_u = v;
    }
    match raw.batch {
        Some(RawBatch::Size(b)) => cfg.batch = BatchSchedule::Constant(b),
        Some(RawBatch::Schedule(s)) => {
            cfg.batch = s.parse().map_err(|e| perr(ctx("batch"), e))?
        }
        None => {}
    }
    if cfg.method == Method::Sgld && raw.beta.is_some_and(|b| b != 0.0) {
        return Err(perr(ctx("beta"), "SGLD has no preconditioner; beta must be 0 or absent"));
    }
    cfg.validated().map_err(|e| perr(format!("method.{label}"), e))
}

fn raw_method(cfg: &MethodConfig) -> RawMethod {
    let adaptive = matches!(cfg.method, Method::Asgld | Method::Agld | Method::Asg);
    RawMethod {
        base: None,
        method: Some(cfg.method.name().to_string()),
        eta: Some(cfg.eta),
        eta_schedule: Some(cfg.eta_schedule.name().to_string()),
        alpha: adaptive.then_some(cfg.alpha),
        beta: match (cfg.method, cfg.beta) {
            (Method::Asgld | Method::Agld, NoiseExponent::Finite(b)) => Some(b),
            _ => None,
        },
        delta: Some(cfg.delta),
        sigma2: Some(cfg.sigma2),
        temperature_u: Some(cfg.temperature_u),
        batch: Some(match cfg.batch {
            BatchSchedule::Constant(b) => RawBatch::Size(b),
            other => RawBatch::Schedule(other.to_string()),
        }),
    }
}

/// Parses and validates an experiment document.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| perr("document", e.to_string().trim_end()))?;
    let problem = resolve_problem(&raw.problem)?;

    let e = &raw.execution;
    if e.budget == 0 {
        return Err(perr("execution.budget", "must be >= 1"));
    }
    if e.seeds.is_empty() {
        return Err(perr("execution.seeds", "at least one seed is required"));
    }
    let mut sorted = e.seeds.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(perr("execution.seeds", "seeds must be distinct"));
    }
    if e.metric_every == 0 {
        return Err(perr("execution.metric_every", "must be >= 1"));
    }
    if !(e.rate_window > 0.0 && e.rate_window <= 1.0) {
        return Err(perr("execution.rate_window", "must lie in (0, 1]"));
    }
    let execution = ExecutionSpec {
        budget: e.budget,
        seeds: e.seeds.clone(),
        out_dir: e.out_dir.clone(),
        metric_every: e.metric_every,
        record_precond: e.record_precond,
        rate_window: e.rate_window,
    };

    let escape = match raw.escape {
        None => None,
        Some(r) => {
            if problem.saddle_family().is_none() {
                return Err(perr("escape", "escape scans need a quadratic_saddle problem"));
            }
            if r.replicates == 0 {
                return Err(perr("escape.replicates", "must be >= 1"));
            }
            let lo = r.dims.iter().copied().min().unwrap_or(0);
            let hi = r.dims.iter().copied().max().unwrap_or(0);
            if lo < 2 || hi < 16 * lo {
                return Err(perr("escape.dims", "dimensions must be >= 2 and span at least 4 octaves"));
            }
            if let Some(t) = r.threshold {
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(perr("escape.threshold", "must be >= 0"));
                }
            }
            if r.budget == Some(0) {
                return Err(perr("escape.budget", "must be >= 1"));
            }
            Some(EscapeSpec {
                dims: r.dims,
                replicates: r.replicates,
                threshold: r.threshold,
                budget: r.budget.unwrap_or(e.budget),
                seed: r.seed,
            })
        }
    };

    let mut methods: Vec<(String, MethodConfig)> = Vec::new();
    if let Some(name) = &raw.preset {
        methods = presets::preset_methods(name).map_err(|e| perr("preset", e))?;
    }
    for (label, value) in raw.method {
        if !valid_label(&label) {
            return Err(perr(
                format!("method.{label}"),
                "labels may only contain ASCII letters, digits, `_` and `-`",
            ));
        }
        if methods.iter().any(|(l, _)| *l == label) {
            return Err(perr(format!("method.{label}"), "duplicate label"));
        }
        let rm: RawMethod = value
            .try_into()
            .map_err(|e: toml::de::Error| perr(format!("method.{label}"), e.to_string().trim_end()))?;
        methods.push((label.clone(), resolve_method(&label, rm)?));
    }
    if methods.is_empty() {
        return Err(perr("method", "no methods configured"));
    }

    Ok(ExperimentSpec {
        problem,
        dataset_seed: raw.problem.dataset_seed,
        execution,
        escape,
        methods,
    })
}

pub(crate) fn to_raw(spec: &ExperimentSpec) -> toml::Table {
    let e = &spec.execution;
    let mut method = toml::Table::new();
    for (label, cfg) in &spec.methods {
        method.insert(
            label.clone(),
            toml::Value::try_from(raw_method(cfg)).expect("method serializes"),
        );
    }
    let raw = RawSpec {
        preset: None,
        problem: raw_problem(&spec.problem, spec.dataset_seed),
        execution: RawExecution {
            budget: e.budget,
            seeds: e.seeds.clone(),
            out_dir: e.out_dir.clone(),
            metric_every: e.metric_every,
            record_precond: e.record_precond,
            rate_window: e.rate_window,
        },
        escape: spec.escape.as_ref().map(|s| RawEscape {
            dims: s.dims.clone(),
            replicates: s.replicates,
            threshold: s.threshold,
            budget: Some(s.budget),
            seed: s.seed,
        }),
        method,
        manifest: None,
    };
    match toml::Value::try_from(raw).expect("spec serializes") {
        toml::Value::Table(t) => t,
        _ => unreachable!(),
    }
}

/// Writes the fully resolved document; `parse_spec` reads it back unchanged.
pub fn serialize(spec: &ExperimentSpec) -> String {
    toml::to_string(&to_raw(spec)).expect("spec serializes")
}
