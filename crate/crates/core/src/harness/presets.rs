use crate::domain::{BatchSchedule, MethodConfig, StepSchedule, DEFAULT_ETA};
use crate::error::{Error, Result};
use crate::oracles::MLE_DEFAULT_SAMPLES;

use super::spec::{EscapeSpec, ExecutionSpec, ExperimentSpec, ProblemSpec};

pub const PRESET_NAMES: [&str; 4] = ["appendix12", "rate_grid", "escape_scaling", "tracesum_grid"];

pub const APPENDIX12_LABELS: [&str; 12] = [
    "SGLD", "SGLD_B", "SGLD_A", "ASGLD", "ASGLD_B", "ASGLD_I", "ASGLD2", "ASGLD3", "ASG", "AGLD",
    "AGLD2", "AGLD3",
];

pub const APPENDIX12_BUDGET: usize = 20_000;
pub const RATE_GRID_BUDGET: usize = 100_000;
pub const ESCAPE_BUDGET: usize = 10_000;
pub const TRACESUM_BUDGET: usize = 10_000;

/// One configuration of the twelve-method comparison on the variance MLE.
///
/// Step size, noise variance and `δ` are not given for this comparison;
/// `η = 0.01`, `σ² = 1`, `δ = 1` are used throughout.
pub fn appendix12_method(label: &str) -> Option<MethodConfig> {
    let eta = DEFAULT_ETA;
    let b10 = BatchSchedule::Constant(10);
    let cfg = match label {
        "SGLD" => MethodConfig::sgld(eta, 1.0),
        "SGLD_B" => MethodConfig::sgld(eta, 1.0).with_batch(b10),
        "SGLD_A" => MethodConfig::sgld(1.0, 1.0)
            .with_batch(b10)
            .with_eta_schedule(StepSchedule::InverseTime),
        "ASGLD" => MethodConfig::asgld(eta, 1.0, 1.0),
        "ASGLD_B" => MethodConfig::asgld(eta, 1.0, 1.0).with_batch(b10),
        "ASGLD_I" => MethodConfig::asgld(eta, 0.0, 1.0).with_batch(BatchSchedule::Linear { c: 1.0 }),
        "ASGLD2" => MethodConfig::asgld(eta, 1.0, 2.0).with_batch(b10),
        "ASGLD3" => MethodConfig::asgld(eta, 1.0, 0.3).with_batch(b10),
        "ASG" => MethodConfig::asg(eta, 1.0),
        "AGLD" => MethodConfig::agld(eta, 0.0, 1.0),
        "AGLD2" => MethodConfig::agld(eta, 0.0, 2.0),
        "AGLD3" => MethodConfig::agld(eta, 0.0, 0.3),
        _ => return None,
    };
    cfg.validated().ok()
}

fn labeled(pairs: &[(&str, MethodConfig)]) -> Vec<(String, MethodConfig)> {
    pairs
        .iter()
        .map(|(l, c)| (l.to_string(), c.clone().validated().expect("preset config is valid")))
        .collect()
}

fn unknown(name: &str) -> Error {
    Error::config(format!(
        "unknown preset `{name}` (available: {})",
        PRESET_NAMES.join(", ")
    ))
}

/// Labeled methods of a preset, used when a document says `preset = "..."`.
pub fn preset_methods(name: &str) -> Result<Vec<(String, MethodConfig)>> {
    Ok(preset(name)?.methods)
}

fn execution(budget: usize, seeds: std::ops::RangeInclusive<u64>, metric_every: usize) -> ExecutionSpec {
    ExecutionSpec {
        budget,
        seeds: seeds.collect(),
        out_dir: None,
        metric_every,
        record_precond: false,
        rate_window: 0.5,
    }
}

/// Builds a complete experiment for one of [`PRESET_NAMES`].
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    match name {
        "appendix12" => Ok(ExperimentSpec {
            problem: ProblemSpec::GaussianVarianceMle {
                samples: MLE_DEFAULT_SAMPLES,
            },
            dataset_seed: 0,
            execution: execution(APPENDIX12_BUDGET, 1..=3, 10),
            escape: None,
            methods: APPENDIX12_LABELS
                .iter()
                .map(|l| (l.to_string(), appendix12_method(l).expect("known label")))
                .collect(),
        }),
        "rate_grid" => {
            let sigma2 = 1.0;
            Ok(ExperimentSpec {
                problem: ProblemSpec::ConvexQuadratic {
                    dim: 20,
                    lo: 0.5,
                    hi: 2.0,
                    noise_std: 1.0,
                    rotate: false,
                },
                dataset_seed: 0,
                execution: execution(RATE_GRID_BUDGET, 1..=10, 100),
                escape: None,
                methods: labeled(&[
                    ("ASG", MethodConfig::asg(0.5, 1.0)),
                    (
                        "ASGLD",
                        MethodConfig::asgld(0.5, 1.0, 1.0).with_sigma2(sigma2),
                    ),
                    ("AGLD", MethodConfig::agld(0.1, 0.0, 1.0).with_sigma2(sigma2)),
                ]),
            })
        }
        "escape_scaling" => Ok(ExperimentSpec {
            problem: ProblemSpec::QuadraticSaddle {
                dim: 2,
                gamma: 1.0,
                lambda: 1.0,
                noise_std: 0.0,
                rotate: false,
            },
            dataset_seed: 0,
            execution: execution(ESCAPE_BUDGET, 1..=3, 100),
            escape: Some(EscapeSpec {
                dims: vec![2, 8, 32, 128, 512],
                replicates: 20,
                threshold: Some(0.1),
                budget: ESCAPE_BUDGET,
                seed: 1,
            }),
            methods: labeled(&[(
                "ASGLD",
                MethodConfig::asgld(1.0, 1.0, 1.0)
                    .with_sigma2(0.1)
                    .with_delta(10.0),
            )]),
        }),
        "tracesum_grid" => {
            let mut exec = execution(TRACESUM_BUDGET, 1..=10, 1);
            exec.record_precond = true;
            Ok(ExperimentSpec {
                problem: ProblemSpec::GaussianVarianceMle {
                    samples: MLE_DEFAULT_SAMPLES,
                },
                dataset_seed: 0,
                execution: exec,
                escape: None,
                methods: labeled(&[(
                    "ASG",
                    MethodConfig::asg(0.1, 1.0).with_delta(100.0),
                )]),
            })
        }
        other => Err(unknown(other)),
    }
}
