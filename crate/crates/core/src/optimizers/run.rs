use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::step::{method_step, StepContext};
use super::trace::{Divergence, RunTrace, Seeds, TraceRecord};
use crate::domain::{norm_sq, MethodConfig, ParamVector, Preconditioner};
use crate::error::{Error, Result};
use crate::oracles::Problem;

const ORACLE_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const INIT_STREAM: u64 = 3;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Knobs for [`run_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub budget: usize,
    /// Overrides the problem's default starting point.
    pub x0: Option<ParamVector>,
    /// Evaluate full-gradient metrics every `m` steps (the final step is
    /// always recorded).
    pub metric_every: usize,
    /// Record the preconditioner diagonal at every recorded step.
    pub record_precond: bool,
}

impl RunOptions {
    pub fn new(budget: usize) -> Self {
        Self {
            budget,
            x0: None,
            metric_every: 1,
            record_precond: false,
        }
    }

    pub fn with_x0(mut self, x0: ParamVector) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn with_precond(mut self) -> Self {
        self.record_precond = true;
        self
    }

    pub fn with_metric_every(mut self, m: usize) -> Self {
        self.metric_every = m;
        self
    }
}

/// Sequential optimizer state.
///
/// Construction evaluates one gradient at `x0` to form the first
/// preconditioner, so step `k` applies an accumulator built from that
/// pre-step gradient and the gradients of steps `0..k`; the gradient of the
/// current step is folded in only after the step is taken.
pub struct Runner<'p> {
    problem: &'p dyn Problem,
    config: MethodConfig,
    x: Vec<f64>,
    precond: Preconditioner,
    k: usize,
    oracle_rng: ChaCha8Rng,
    noise_rng: ChaCha8Rng,
    batch_capped: bool,
}

impl<'p> Runner<'p> {
    pub fn new(
        problem: &'p dyn Problem,
        config: &MethodConfig,
        seeds: Seeds,
        x0: Option<ParamVector>,
    ) -> Result<Self> {
        let config = config.clone().validated()?;
        let d = problem.dim();
        let x0 = match x0 {
            Some(x) => x,
            None => problem.initial_point(&mut stream_rng(seeds.noise, INIT_STREAM)),
        };
        if x0.dim() != d {
            return Err(Error::contract(format!(
                "x0 has dimension {}, problem has {d}",
                x0.dim()
            )));
        }
        if !x0.is_finite() {
            return Err(Error::config("x0 must be finite"));
        }
        let mut runner = Self {
            problem,
            precond: Preconditioner::new(d, config.delta)?,
            config,
            x: x0.into_inner(),
            k: 0,
            oracle_rng: stream_rng(seeds.oracle, ORACLE_STREAM),
            noise_rng: stream_rng(seeds.noise, NOISE_STREAM),
            batch_capped: false,
        };
        let g0 = runner.gradient_for_step(0)?;
        runner.precond.update(&g0)?;
        Ok(runner)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn precond(&self) -> &Preconditioner {
        &self.precond
    }

    pub fn config(&self) -> &MethodConfig {
        &self.config
    }

    pub fn batch_capped(&self) -> bool {
        self.batch_capped
    }

    /// Batch size for step `k`, capped at the dataset size.
    pub fn batch_at(&self, k: usize) -> usize {
        if self.config.method.uses_full_gradient() {
            return self.problem.dataset_size().unwrap_or(0);
        }
        let b = self.config.batch.size(k);
        match self.problem.dataset_size() {
            Some(n) => b.min(n),
            None => b,
        }
    }

    fn gradient_for_step(&mut self, k: usize) -> Result<Vec<f64>> {
        if self.config.method.uses_full_gradient() {
            return self.problem.gradient(&self.x);
        }
        let raw = self.config.batch.size(k);
        let b = self.batch_at(k);
        if b < raw {
            self.batch_capped = true;
        }
        self.problem
            .stochastic_gradient(&self.x, b, &mut self.oracle_rng)
    }

    /// Takes one step. On error the state is left at the last good iterate.
    pub fn step(&mut self) -> Result<()> {
        let k = self.k;
        let g = self.gradient_for_step(k).map_err(|e| at_step(e, k))?;
        let mut next = {
            let mut ctx = StepContext {
                x: &self.x,
                precond: &self.precond,
                k,
                rng: &mut self.noise_rng,
            };
            method_step(&mut ctx, &g, &self.config)?
        };
        self.problem.project(&mut next);
        self.precond.update(&g).map_err(|e| at_step(e, k))?;
        self.x = next.into_inner();
        self.k += 1;
        Ok(())
    }
}

fn at_step(e: Error, step: usize) -> Error {
    match e {
        Error::Numeric { msg, .. } => Error::Numeric { step, msg },
        Error::Domain(msg) => Error::Numeric { step, msg },
        other => other,
    }
}

/// Runs `budget` steps with default options.
pub fn run(
    problem: &dyn Problem,
    config: &MethodConfig,
    budget: usize,
    seeds: Seeds,
) -> Result<RunTrace> {
    run_with(problem, config, seeds, &RunOptions::new(budget))
}

/// Runs a fixed budget and records the trace. Numeric failures end the run
/// early and are reported through [`RunTrace::divergence`]; only invalid
/// inputs return `Err`.
pub fn run_with(
    problem: &dyn Problem,
    config: &MethodConfig,
    seeds: Seeds,
    opts: &RunOptions,
) -> Result<RunTrace> {
    if opts.budget == 0 {
        return Err(Error::config("budget must be >= 1"));
    }
    if opts.metric_every == 0 {
        return Err(Error::config("metric_every must be >= 1"));
    }
    let mut runner = Runner::new(problem, config, seeds, opts.x0.clone())?;
    let x0 = ParamVector::new(runner.x().to_vec())?;

    let mut warnings = Vec::new();
    if let Some(w) = problem.metadata().step_size_warning(runner.config().eta) {
        warnings.push(w);
    }

    let mut records = Vec::with_capacity(opts.budget / opts.metric_every + 2);
    let mut diags = opts.record_precond.then(Vec::new);
    let mut running_min = f64::INFINITY;
    let mut divergence = None;

    let mut record = |runner: &Runner<'_>, records: &mut Vec<TraceRecord>| -> Result<()> {
        let x = runner.x();
        let f = problem.objective(x)?;
        let g = problem.gradient(x)?;
        let gsq = norm_sq(&g);
        if !(f.is_finite() && gsq.is_finite()) {
            return Err(Error::Numeric {
                step: runner.k(),
                msg: "objective or gradient overflowed".into(),
            });
        }
        running_min = running_min.min(gsq);
        records.push(TraceRecord {
            k: runner.k(),
            f,
            grad_norm: gsq.sqrt(),
            min_grad_sq: running_min,
            batch: runner.batch_at(runner.k()),
            err_metric: problem.error_metric(x),
        });
        if let Some(d) = diags.as_mut() {
            d.push(runner.precond().diag().to_vec());
        }
        Ok(())
    };

    record(&runner, &mut records)?;
    for _ in 0..opts.budget {
        let k = runner.k();
        if let Err(e) = runner.step() {
            divergence = Some(Divergence {
                step: k,
                message: e.to_string(),
            });
            break;
        }
        let k = runner.k();
        if k % opts.metric_every == 0 || k == opts.budget {
            if let Err(e) = record(&runner, &mut records) {
                divergence = Some(Divergence {
                    step: k,
                    message: e.to_string(),
                });
                break;
            }
        }
    }

    Ok(RunTrace {
        problem: problem.name().to_string(),
        config: runner.config().clone(),
        seeds,
        budget: opts.budget,
        metric_every: opts.metric_every,
        x0,
        final_x: ParamVector::new(runner.x().to_vec())?,
        records,
        precond_diags: diags,
        divergence,
        batch_capped: runner.batch_capped(),
        warnings,
    })
}
