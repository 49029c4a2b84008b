use std::fs;

use proptest::prelude::*;

use super::*;
use crate::domain::{BatchSchedule, Method, MethodConfig, NoiseExponent, StepSchedule};
use crate::error::Error;

const MINIMAL: &str = r#"
[problem]
kind = "quadratic_saddle"
dim = 4

[execution]
budget = 100
seeds = [1]

[method.fast]
method = "ASG"
alpha = 1.0
"#;

fn parse_err(text: &str) -> String {
    match parse_spec(text) {
        Err(e @ Error::Parse { .. }) => e.to_string(),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn minimal_spec() {
    let s = parse_spec(MINIMAL).unwrap();
    assert_eq!(s.methods.len(), 1);
    assert_eq!(s.methods[0].0, "fast");
    assert_eq!(s.methods[0].1.method, Method::Asg);
    assert_eq!(s.execution.budget, 100);
    assert_eq!(s.execution.seeds, vec![1]);
    assert!(matches!(s.problem, ProblemSpec::QuadraticSaddle { dim: 4, .. }));
}

#[test]
fn missing_beta_is_named() {
    let text = MINIMAL.replace("method = \"ASG\"", "method = \"ASGLD\"");
    let msg = parse_err(&text);
    assert!(msg.contains("beta"), "{msg}");
    let text = MINIMAL.replace("method = \"ASG\"", "method = \"agld\"");
    assert!(parse_err(&text).contains("beta"));
}

#[test]
fn unknown_keys_and_kinds_rejected() {
    let msg = parse_err(&MINIMAL.replace("budget = 100", "budget = 100\nbugdet = 3"));
    assert!(msg.contains("bugdet"), "{msg}");
    let msg = parse_err(&MINIMAL.replace("alpha = 1.0", "alpha = 1.0\nmomentum = 0.9"));
    assert!(msg.contains("momentum"), "{msg}");
    let msg = parse_err(&MINIMAL.replace("\"ASG\"", "\"ADAM\""));
    assert!(msg.contains("ADAM"), "{msg}");
    let msg = parse_err(&MINIMAL.replace("quadratic_saddle", "rosenbrock"));
    assert!(msg.contains("rosenbrock"));
    let msg = parse_err(&MINIMAL.replace("dim = 4", "dim = 4\nsamples = 10"));
    assert!(msg.contains("samples"));
}

#[test]
fn out_of_range_parameters_rejected() {
    assert!(parse_err(&MINIMAL.replace("alpha = 1.0", "alpha = 3.0")).contains("alpha"));
    assert!(parse_err(&MINIMAL.replace("budget = 100", "budget = 0")).contains("budget"));
    assert!(parse_err(&MINIMAL.replace("seeds = [1]", "seeds = []")).contains("seeds"));
    assert!(parse_err(&MINIMAL.replace("alpha = 1.0", "alpha = 1.0\neta = -1")).contains("eta"));
    assert!(parse_err(&MINIMAL.replace("alpha = 1.0", "alpha = 1.0\nbatch = \"linear(0)\"")).contains("batch"));
    assert!(parse_err("not = [valid").contains("document"));
}

#[test]
fn preset_key_expands_appendix12() {
    let text = r#"
preset = "appendix12"
[problem]
kind = "gaussian_variance_mle"
samples = 500
[execution]
budget = 10
seeds = [1, 2, 3]
"#;
    let s = parse_spec(text).unwrap();
    let labels: Vec<&str> = s.methods.iter().map(|(l, _)| l.as_str()).collect();
    assert_eq!(labels, APPENDIX12_LABELS);

    let i = &s.methods[5];
    assert_eq!(i.0, "ASGLD_I");
    assert_eq!(i.1.alpha, 0.0);
    assert_eq!(i.1.beta, NoiseExponent::Finite(1.0));
    assert_eq!(i.1.batch, BatchSchedule::Linear { c: 1.0 });

    let a = &s.methods[2];
    assert_eq!(a.0, "SGLD_A");
    assert_eq!(a.1.eta_schedule, StepSchedule::InverseTime);
    assert_eq!(a.1.eta, 1.0);
    assert_eq!(a.1.batch, BatchSchedule::Constant(10));

    assert_eq!(s.method("AGLD3").unwrap().beta, NoiseExponent::Finite(0.3));
    assert_eq!(s.method("ASGLD3").unwrap().beta, NoiseExponent::Finite(0.3));
    assert_eq!(s.method("ASG").unwrap().beta, NoiseExponent::NoNoise);
}

#[test]
fn base_label_and_duplicates() {
    let text = MINIMAL.replace(
        "[method.fast]\nmethod = \"ASG\"\nalpha = 1.0",
        "[method.mine]\nbase = \"ASGLD_B\"\nsigma2 = 0.25",
    );
    let s = parse_spec(&text).unwrap();
    let c = s.method("mine").unwrap();
    assert_eq!(c.batch, BatchSchedule::Constant(10));
    assert_eq!(c.sigma2, 0.25);
    let bad = text.replace("ASGLD_B", "ASGLD_Z");
    assert!(parse_err(&bad).contains("ASGLD_Z"));
    let dup = format!("preset = \"appendix12\"\n{}", MINIMAL.replace("[method.fast]", "[method.ASG]"));
    assert!(parse_err(&dup).contains("duplicate"));
}

#[test]
fn presets_resolve_and_round_trip() {
    for name in PRESET_NAMES {
        let s = preset(name).unwrap();
        assert_eq!(parse_spec(&serialize(&s)).unwrap(), s, "{name}");
    }
    assert_eq!(preset("appendix12").unwrap().execution.budget, 20_000);
    assert_eq!(preset("rate_grid").unwrap().execution.budget, 100_000);
    assert_eq!(preset("escape_scaling").unwrap().escape.unwrap().budget, 10_000);
    let msg = preset("nonexistent").unwrap_err().to_string();
    for name in PRESET_NAMES {
        assert!(msg.contains(name));
    }
}

fn arb_method() -> impl Strategy<Value = MethodConfig> {
    let batch = prop_oneof![
        (1usize..500).prop_map(BatchSchedule::Constant),
        (0.01f64..10.0).prop_map(|c| BatchSchedule::Linear { c }),
        (0.01f64..10.0, -1.0f64..2.0).prop_map(|(c, theta)| BatchSchedule::PowerLaw { c, theta }),
    ];
    (
        0usize..5,
        1e-4f64..2.0,
        any::<bool>(),
        0.0f64..=2.0,
        0.0f64..4.0,
        1e-3f64..100.0,
        0.0f64..5.0,
        0.1f64..10.0,
        batch,
    )
        .prop_map(|(m, eta, inv, alpha, beta, delta, sigma2, u, batch)| {
            let cfg = match Method::ALL[m] {
                Method::Asgld => MethodConfig::asgld(eta, alpha, beta),
                Method::Agld => MethodConfig::agld(eta, alpha, beta),
                Method::Asg => MethodConfig::asg(eta, alpha),
                Method::Sgld => MethodConfig::sgld(eta, u),
                Method::Sgd => MethodConfig::sgd(eta),
            };
            let mut cfg = cfg.with_delta(delta).with_sigma2(sigma2).with_batch(batch);
            cfg.temperature_u = u;
            if inv {
                cfg = cfg.with_eta_schedule(StepSchedule::InverseTime);
            }
            cfg.validated().unwrap()
        })
}

fn arb_problem() -> impl Strategy<Value = ProblemSpec> {
    prop_oneof![
        (1usize..300).prop_map(|samples| ProblemSpec::GaussianVarianceMle { samples }),
        (2usize..20, 0.01f64..5.0, 0.01f64..5.0, 0.0f64..2.0, any::<bool>()).prop_map(
            |(dim, gamma, lambda, noise_std, rotate)| ProblemSpec::QuadraticSaddle {
                dim,
                gamma,
                lambda,
                noise_std,
                rotate
            }
        ),
        (1usize..20, 0.01f64..1.0, 1.0f64..5.0, 0.0f64..2.0, any::<bool>()).prop_map(
            |(dim, lo, hi, noise_std, rotate)| ProblemSpec::ConvexQuadratic {
                dim,
                lo,
                hi,
                noise_std,
                rotate
            }
        ),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn serialize_round_trips(
        problem in arb_problem(),
        dataset_seed in 0u64..(i64::MAX as u64),
        budget in 1usize..1_000_000,
        seeds in proptest::collection::btree_set(0u64..1_000_000, 1..6),
        metric_every in 1usize..100,
        record_precond in any::<bool>(),
        rate_window in 0.01f64..=1.0,
        out in proptest::option::of("[a-z]{1,8}"),
        methods in proptest::collection::vec(arb_method(), 1..5),
        escape in proptest::option::of((1usize..30, proptest::option::of(0.0f64..1.0), 1usize..1000, 0u64..100)),
    ) {
        let escape = match (&problem, escape) {
            (ProblemSpec::QuadraticSaddle { .. }, Some((replicates, threshold, budget, seed))) => Some(EscapeSpec {
                dims: vec![2, 8, 32],
                replicates,
                threshold,
                budget,
                seed,
            }),
            _ => None,
        };
        let spec = ExperimentSpec {
            problem,
            dataset_seed,
            execution: ExecutionSpec {
                budget,
                seeds: seeds.into_iter().collect(),
                out_dir: out.map(Into::into),
                metric_every,
                record_precond,
                rate_window,
            },
            escape,
            methods: methods.into_iter().enumerate().map(|(i, c)| (format!("m{i}"), c)).collect(),
        };
        let text = serialize(&spec);
        let back = parse_spec(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, spec);
    }
}

fn small_appendix12(budget: usize) -> ExperimentSpec {
    let mut s = preset("appendix12").unwrap();
    s.problem = ProblemSpec::GaussianVarianceMle { samples: 2000 };
    s.execution.budget = budget;
    s
}

#[test]
fn appendix12_file_contract_and_determinism() {
    let spec = small_appendix12(200);
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let ra = run_experiment(&spec, &a, 1).unwrap();
    let rb = run_experiment(&spec, &b, 4).unwrap();
    assert!(ra.success(), "{}", ra.render());
    assert_eq!(ra.trace_files.len(), 36);
    let entries = fs::read_dir(&a).unwrap().count();
    assert_eq!(entries, 38);
    assert!(a.join(SUMMARY_FILE).exists() && a.join(MANIFEST_FILE).exists());
    for f in &ra.trace_files {
        let name = f.file_name().unwrap();
        assert_eq!(fs::read(f).unwrap(), fs::read(b.join(name)).unwrap());
    }
    assert_eq!(
        fs::read(a.join(SUMMARY_FILE)).unwrap(),
        fs::read(b.join(SUMMARY_FILE)).unwrap()
    );
    assert!(a.join("ASGLD_I_seed2.csv").exists());
    assert_eq!(rb.rows, ra.rows);
}

#[test]
fn manifest_reproduces_outputs() {
    let mut spec = small_appendix12(50);
    spec.methods.truncate(3);
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&spec, dir.path(), 0).unwrap();
    let manifest = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    assert!(manifest.contains(&format!("asgld-core {}", crate::VERSION)));
    let again = parse_spec(&manifest).unwrap();
    assert_eq!(again, spec);
    let dir2 = tempfile::tempdir().unwrap();
    run_experiment(&again, dir2.path(), 0).unwrap();
    let f = trace_file_name("SGLD_A", 3);
    assert_eq!(
        fs::read(dir.path().join(&f)).unwrap(),
        fs::read(dir2.path().join(&f)).unwrap()
    );
}

#[test]
fn summary_reads_back_and_refits() {
    let spec = parse_spec(
        r#"
[problem]
kind = "convex_quadratic"
dim = 5
spectrum_lo = 0.5
spectrum_hi = 2.0
noise_std = 1.0
[execution]
budget = 2000
seeds = [1, 2, 3, 4]
metric_every = 10
[method.ASG]
method = "ASG"
alpha = 1.0
eta = 0.5
"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&spec, dir.path(), 0).unwrap();
    let summary = dir.path().join(SUMMARY_FILE);
    let rows = read_summary(&summary).unwrap();
    assert_eq!(rows, report.rows);
    let slope = |rows: &[SummaryRow]| {
        rows.iter()
            .find(|r| r.section == "rate" && r.key == "slope")
            .and_then(SummaryRow::number)
            .unwrap()
    };
    let refit = refit_summary(&summary, None).unwrap();
    assert_eq!(slope(&refit), slope(&rows));
    assert!(slope(&rows) < 0.0);
}

#[test]
fn tracesum_rows_present_when_recording() {
    let mut spec = preset("tracesum_grid").unwrap();
    spec.problem = ProblemSpec::GaussianVarianceMle { samples: 1000 };
    spec.execution.budget = 300;
    spec.execution.seeds = vec![1, 2, 3];
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&spec, dir.path(), 0).unwrap();
    let get = |sec: &str, key: &str| {
        r.rows
            .iter()
            .find(|x| x.section == sec && x.key == key)
            .and_then(SummaryRow::number)
    };
    assert_eq!(get("tracesum", "final_sum_phi0"), Some(600.0));
    assert!(get("tracesum", "exponent_phi0.5").is_some());
    assert!(get("decomposition", "i1_final").unwrap() >= 0.0);
    assert_eq!(get("decomposition", "i3_final"), Some(0.0));
}

#[test]
fn escape_summary_has_medians_and_both_fits() {
    let mut spec = preset("escape_scaling").unwrap();
    let esc = spec.escape.as_mut().unwrap();
    esc.dims = vec![2, 8, 32];
    esc.replicates = 5;
    esc.budget = 2000;
    spec.execution.budget = 100;
    spec.execution.seeds = vec![1];
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&spec, dir.path(), 0).unwrap();
    assert!(r.success(), "{}", r.render());
    let medians = r.rows.iter().filter(|x| x.section == "escape" && x.key == "median_step").count();
    assert_eq!(medians, 3);
    for key in ["log_residual", "power_residual", "power_p", "log_b"] {
        assert!(r.rows.iter().any(|x| x.section == "escape_fit" && x.key == key), "{key}");
    }
    let refit = refit_summary(&dir.path().join(SUMMARY_FILE), None).unwrap();
    assert!(refit.iter().any(|x| x.key == "power_p"));
}

#[test]
fn divergence_is_flagged_not_fatal() {
    let spec = parse_spec(
        r#"
[problem]
kind = "quadratic_saddle"
dim = 2
noise_std = 1.0
[execution]
budget = 500
seeds = [1, 2]
[method.blowup]
method = "SGD"
eta = 1000.0
[method.calm]
method = "SGD"
eta = 0.001
"#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&spec, dir.path(), 0).unwrap();
    assert!(!r.success());
    assert_eq!(r.diverged.len(), 2);
    assert!(r.diverged.iter().all(|(l, _, _)| l == "blowup"));
    assert_eq!(r.trace_files.len(), 4);
    assert!(r
        .rows
        .iter()
        .any(|x| x.label == "blowup" && x.key == "status" && x.value == "diverged"));
}

#[test]
fn write_failure_is_reported() {
    let mut spec = small_appendix12(20);
    spec.methods.truncate(1);
    spec.execution.seeds = vec![1];
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join(trace_file_name("SGLD", 1))).unwrap();
    let r = run_experiment(&spec, dir.path(), 0).unwrap();
    assert!(!r.success());
    assert_eq!(r.write_errors.len(), 1);
}

#[test]
fn self_check_passes() {
    for c in self_check() {
        assert!(c.passed, "{}: {}", c.name, c.detail);
    }
}
