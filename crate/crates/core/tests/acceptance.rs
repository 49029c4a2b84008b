//! Acceptance suite. Prints one line per criterion and exits nonzero when a
//! criterion outside `KNOWN_FAILURES` fails.

use std::time::{Duration, Instant};

use asgld_core::diagnostics::{escape_scaling, fit_rate, measure_escape, trace_sums, DEFAULT_WINDOW};
use asgld_core::harness::{preset, run_experiment, self_check, ExperimentSpec, PRESET_NAMES};
use asgld_core::oracles::fd_gradient_check;
use asgld_core::{
    run, run_with, BatchSchedule, GaussianVarianceMle, MethodConfig, ParamVector, Problem, Quadratic,
    RunOptions, RunTrace, Seeds,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose gate is not met by the implementation; see the README.
const KNOWN_FAILURES: &[u32] = &[6];

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome, Duration);

fn gate(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn mle() -> GaussianVarianceMle {
    GaussianVarianceMle::new(10_000, 0).expect("dataset")
}

fn c1_lattice() -> Outcome {
    let p = mle();
    let eta = 0.01;
    let n = p.n();
    let pairs = [
        ("ASGLD(sigma2=0) = ASG", MethodConfig::asgld(eta, 1.0, 1.0).with_sigma2(0.0), MethodConfig::asg(eta, 1.0)),
        ("ASG(alpha=0) = SGD", MethodConfig::asg(eta, 0.0), MethodConfig::sgd(eta)),
        (
            "ASGLD(B=n) = AGLD",
            MethodConfig::asgld(eta, 1.0, 1.0).with_batch(BatchSchedule::Constant(n)),
            MethodConfig::agld(eta, 1.0, 1.0),
        ),
        ("ASGLD(0,0) = SGLD", MethodConfig::asgld(eta, 0.0, 0.0), MethodConfig::sgld(eta, 1.0)),
    ];
    for (name, a, b) in &pairs {
        for seed in 1..=3 {
            let ta = run(&p, a, 1000, Seeds::run(0, seed)).map_err(err)?;
            let tb = run(&p, b, 1000, Seeds::run(0, seed)).map_err(err)?;
            let same_x = ta.final_x.as_slice().iter().zip(tb.final_x.as_slice()).all(|(u, v)| u.to_bits() == v.to_bits());
            if ta.to_csv_string() != tb.to_csv_string() || !same_x {
                return Err(format!("{name}: seed {seed} differs"));
            }
        }
    }
    Ok("4 reductions x 3 seeds bit-identical over 1000 steps".into())
}

fn draws(p: &dyn Problem, x: &[f64], batch: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| p.stochastic_gradient(x, batch, &mut rng).expect("draw")).collect()
}

fn mean_var(v: &[Vec<f64>], i: usize) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().map(|g| g[i]).sum::<f64>() / n;
    (m, v.iter().map(|g| (g[i] - m).powi(2)).sum::<f64>() / (n - 1.0))
}

fn c2_oracles() -> Outcome {
    let p = mle();
    let q = Quadratic::uniform_saddle(10, 1.0, 1.0).map_err(err)?.with_rotation(5).with_noise(0.5).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut fd_mle, mut fd_q) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let x = [rng.gen_range(0.05..20.0), rng.gen_range(0.05..20.0)];
        fd_mle = fd_mle.max(fd_gradient_check(&p, &x, 1e-6).map_err(err)?);
        let y: Vec<f64> = (0..10).map(|_| rng.gen_range(-3.0..3.0)).collect();
        fd_q = fd_q.max(fd_gradient_check(&q, &y, 1e-5).map_err(err)?);
    }
    if !(fd_mle < 1e-4 && fd_q < 1e-6) {
        return Err(format!("finite differences: mle {fd_mle:.1e}, saddle {fd_q:.1e}"));
    }

    let xq: Vec<f64> = (0..10).map(|i| 0.2 * i as f64 - 1.0).collect();
    let cases: [(&dyn Problem, Vec<f64>); 2] = [(&p, vec![0.5, 5.0]), (&q, xq)];
    let mut worst_z = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (prob, x) in cases {
        let full = prob.gradient(&x).map_err(err)?;
        let g1 = draws(prob, &x, 1, 10_000, 3);
        let v1: Vec<f64> = (0..x.len()).map(|i| mean_var(&g1, i).1).collect();
        for (i, fi) in full.iter().enumerate() {
            let (m, v) = mean_var(&g1, i);
            worst_z = worst_z.max((m - fi).abs() / (v / g1.len() as f64).sqrt());
        }
        for b in [10usize, 100] {
            let gb = draws(prob, &x, b, 10_000, 12 + b as u64);
            for (i, v) in v1.iter().enumerate() {
                let ratio = v / mean_var(&gb, i).1 / b as f64;
                worst_ratio = worst_ratio.max((ratio - 1.0).abs());
            }
        }
    }
    gate(
        worst_z < 3.0 && worst_ratio <= 0.3,
        format!(
            "fd mle {fd_mle:.1e} saddle {fd_q:.1e}; worst bias {worst_z:.2} SE; worst Var(B=1)/(B Var(B)) deviation {:.0}%",
            100.0 * worst_ratio
        ),
    )
}

fn run_spec_seeds(spec: &ExperimentSpec, label: &str, opts: &RunOptions) -> Result<Vec<RunTrace>, String> {
    let p = spec.problem.build(spec.dataset_seed).map_err(err)?;
    let cfg = spec.method(label).ok_or("missing label")?;
    spec.execution
        .seeds
        .iter()
        .map(|&s| run_with(p.as_ref(), cfg, Seeds::run(spec.dataset_seed, s), opts).map_err(err))
        .collect()
}

fn c3_trace_sums() -> Outcome {
    let spec = preset("tracesum_grid").map_err(err)?;
    let opts = RunOptions::new(spec.execution.budget).with_precond();
    let traces = run_spec_seeds(&spec, "ASG", &opts)?;
    let half = trace_sums(&traces, 0.5).map_err(err)?;
    let one = trace_sums(&traces, 1.0).map_err(err)?;
    let two = trace_sums(&traces, 2.0).map_err(err)?;
    let ok = (0.4..=0.6).contains(&half.exponent())
        && (-1.1..=-0.9).contains(&two.exponent())
        && one.fit.r_squared > 0.95;
    gate(
        ok,
        format!(
            "phi=0.5 exponent {:.3}; phi=2 increment exponent {:.3}; phi=1 log fit r2 {:.4}",
            half.exponent(),
            two.exponent(),
            one.fit.r_squared
        ),
    )
}

fn c4_rates() -> Outcome {
    let spec = preset("rate_grid").map_err(err)?;
    let opts = RunOptions::new(spec.execution.budget).with_metric_every(spec.execution.metric_every);
    let mut parts = Vec::new();
    let mut ok = true;
    for (label, lo, hi) in [("ASG", -0.65, -0.35), ("ASGLD", -0.65, -0.35), ("AGLD", -1.2, -0.8)] {
        let traces = run_spec_seeds(&spec, label, &opts)?;
        let fit = fit_rate(&traces, DEFAULT_WINDOW).map_err(err)?;
        ok &= (lo..=hi).contains(&fit.slope);
        parts.push(format!("{label} {:.3} in [{lo}, {hi}]", fit.slope));
    }
    gate(ok, parts.join("; "))
}

fn tail_median_grad(t: &RunTrace) -> f64 {
    let start = t.records.len() - t.records.len() / 10;
    let mut v: Vec<f64> = t.records[start..].iter().map(|r| r.grad_norm).collect();
    asgld_core::diagnostics::median(&mut v).unwrap_or(f64::NAN)
}

fn c5_sgld_contrast() -> Outcome {
    let p = mle();
    let (eta, sigma2, batch) = (0.03, 0.003, BatchSchedule::Constant(1000));
    let sgld = MethodConfig::sgld(eta, 1.0).with_sigma2(sigma2).with_batch(batch);
    let asgld = MethodConfig::asgld(eta, 1.0, 1.0).with_sigma2(sigma2).with_batch(batch);
    let mut wins = 0;
    let mut ratios = Vec::new();
    for seed in 1..=10 {
        let s = tail_median_grad(&run(&p, &sgld, 20_000, Seeds::run(0, seed)).map_err(err)?);
        let a = tail_median_grad(&run(&p, &asgld, 20_000, Seeds::run(0, seed)).map_err(err)?);
        if s >= 5.0 * a {
            wins += 1;
        }
        ratios.push(s / a);
    }
    let mid = asgld_core::diagnostics::median(&mut ratios).unwrap_or(f64::NAN);
    gate(
        wins >= 8,
        format!("SGLD/ASGLD tail gradient ratio >= 5 on {wins}/10 seeds (median ratio {mid:.2})"),
    )
}

fn c6_escape() -> Outcome {
    let spec = preset("escape_scaling").map_err(err)?;
    let esc = spec.escape.as_ref().ok_or("preset has no escape block")?;
    let family = spec.problem.saddle_family().ok_or("not a saddle problem")?;
    let cfg = spec.method("ASGLD").ok_or("missing ASGLD")?;
    let threshold = esc.threshold.unwrap_or(0.1 * family.gamma);
    let r = escape_scaling(&esc.dims, family, cfg, esc.replicates, esc.budget, threshold, esc.seed).map_err(err)?;
    let medians: Vec<String> = r
        .cells
        .iter()
        .map(|c| format!("{}:{}", c.dimension, c.median_step.map_or("-".into(), |m| m.to_string())))
        .collect();
    let fits = r.fits.ok_or_else(|| format!("too few escaped dimensions ({})", medians.join(" ")))?;
    gate(
        fits.power_exponent() < 0.3 && fits.log_residual_not_worse(),
        format!(
            "medians {}; power p {:.3} (residual {:.3}); log residual {:.3}",
            medians.join(" "),
            fits.power_exponent(),
            fits.power_model.residual,
            fits.log_model.residual
        ),
    )
}

fn c7_fixed_points() -> Outcome {
    let gd = MethodConfig::agld(0.1, 0.0, 1.0).with_sigma2(0.0);
    let saddle = Quadratic::uniform_saddle(8, 1.0, 1.0).map_err(err)?;
    if measure_escape(&saddle, &gd, 1000, 0.1, Seeds::run(0, 1)).is_ok() {
        return Err("noise-free AGLD accepted at the saddle".into());
    }
    let bowl = Quadratic::convex(Quadratic::linspace_spectrum(8, 0.5, 2.0)).map_err(err)?.with_rotation(3);
    let t = run_with(&bowl, &gd, Seeds::run(0, 1), &RunOptions::new(1000).with_x0(ParamVector::zeros(8))).map_err(err)?;
    let dist = t.final_x.norm();
    gate(dist <= 1e-12, format!("saddle start rejected; distance from minimum after 1000 steps {dist:e}"))
}

/// Shrinks a preset so both reruns stay cheap; seeds and methods are unchanged.
fn shrink(mut spec: ExperimentSpec) -> ExperimentSpec {
    spec.execution.budget = spec.execution.budget.min(2000);
    if let Some(e) = spec.escape.as_mut() {
        e.budget = e.budget.min(2000);
        e.replicates = e.replicates.min(3);
        e.dims = vec![2, 8, 32];
    }
    spec
}

fn c8_determinism() -> Outcome {
    let root = tempfile::tempdir().map_err(err)?;
    let mut files = 0;
    for name in PRESET_NAMES {
        let spec = preset(name).map_err(err)?;
        let spec = if name == "appendix12" { spec } else { shrink(spec) };
        let a = root.path().join(format!("{name}_a"));
        let b = root.path().join(format!("{name}_b"));
        run_experiment(&spec, &a, 1).map_err(err)?;
        run_experiment(&spec, &b, 4).map_err(err)?;
        let mut names: Vec<_> = std::fs::read_dir(&a)
            .map_err(err)?
            .map(|e| e.map(|e| e.file_name()))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        names.sort();
        for f in names {
            if !f.to_string_lossy().ends_with(".csv") {
                continue;
            }
            let x = std::fs::read(a.join(&f)).map_err(err)?;
            let y = std::fs::read(b.join(&f)).map_err(err)?;
            if x != y {
                return Err(format!("{name}: {} differs between reruns", f.to_string_lossy()));
            }
            files += 1;
        }
    }
    let checks = self_check();
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    gate(
        failed.is_empty(),
        format!("{files} CSVs byte-identical across reruns; self-check {}/{} ({})", checks.len() - failed.len(), checks.len(), failed.join(", ")),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "reduction lattice", c1_lattice, Duration::from_secs(10)),
        (2, "gradient oracles", c2_oracles, Duration::from_secs(30)),
        (3, "trace-sum growth", c3_trace_sums, Duration::from_secs(300)),
        (4, "rate slopes", c4_rates, Duration::from_secs(600)),
        (5, "SGLD contrast", c5_sgld_contrast, Duration::from_secs(300)),
        (6, "escape scaling", c6_escape, Duration::from_secs(900)),
        (7, "fixed points", c7_fixed_points, Duration::from_secs(60)),
        (8, "harness determinism", c8_determinism, Duration::from_secs(600)),
    ];
    let mut unexpected = Vec::new();
    for (n, name, f, limit) in criteria {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let (pass, detail) = match out {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; took {took:.1?}, limit {limit:?}")),
            Err(d) => (false, d),
        };
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("criterion {n} [{tag}] {name}: {detail} ({took:.1?})");
        if !pass && !KNOWN_FAILURES.contains(&n) {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
