use crate::diagnostics::{measure_escape, trace_sums};
use crate::domain::{MethodConfig, ParamVector, Preconditioner};
use crate::oracles::{fd_gradient_check, GaussianVarianceMle, Problem, Quadratic};
use crate::optimizers::{run_with, RunOptions, Seeds};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, r: std::result::Result<String, String>) -> CheckOutcome {
    match r {
        Ok(detail) => CheckOutcome { name, passed: true, detail },
        Err(detail) => CheckOutcome { name, passed: false, detail },
    }
}

fn same_traces(p: &dyn Problem, a: &MethodConfig, b: &MethodConfig, steps: usize) -> std::result::Result<String, String> {
    for seed in 1..=3 {
        let opts = RunOptions::new(steps);
        let ta = run_with(p, a, Seeds::run(0, seed), &opts).map_err(|e| e.to_string())?;
        let tb = run_with(p, b, Seeds::run(0, seed), &opts).map_err(|e| e.to_string())?;
        if ta.to_csv_string() != tb.to_csv_string() || ta.final_x != tb.final_x {
            return Err(format!("traces differ for seed {seed}"));
        }
    }
    Ok(format!("{steps} steps x 3 seeds bit-identical"))
}

/// Fast invariant checks covering the optimizer, oracles and diagnostics.
pub fn self_check() -> Vec<CheckOutcome> {
    let mle = match GaussianVarianceMle::new(1000, 0) {
        Ok(p) => p,
        Err(e) => {
            return vec![CheckOutcome {
                name: "mle construction",
                passed: false,
                detail: e.to_string(),
            }]
        }
    };
    let eta = 0.01;
    let mut out = Vec::new();

    out.push(outcome(
        "ASGLD(sigma2=0) == ASG",
        same_traces(
            &mle,
            &MethodConfig::asgld(eta, 1.0, 1.0).with_sigma2(0.0),
            &MethodConfig::asg(eta, 1.0),
            300,
        ),
    ));
    out.push(outcome(
        "ASG(alpha=0) == SGD",
        same_traces(&mle, &MethodConfig::asg(eta, 0.0), &MethodConfig::sgd(eta), 300),
    ));
    out.push(outcome(
        "ASGLD(B=n) == AGLD",
        same_traces(
            &mle,
            &MethodConfig::asgld(eta, 1.0, 1.0).with_batch(crate::BatchSchedule::Constant(mle.n())),
            &MethodConfig::agld(eta, 1.0, 1.0),
            300,
        ),
    ));
    out.push(outcome(
        "ASGLD(alpha=beta=0) == SGLD",
        same_traces(
            &mle,
            &MethodConfig::asgld(eta, 0.0, 0.0),
            &MethodConfig::sgld(eta, 1.0),
            300,
        ),
    ));

    out.push(outcome("preconditioner lower bound", (|| {
        let mut p = Preconditioner::new(3, 0.5).map_err(|e| e.to_string())?;
        for k in 1..=50 {
            p.update(&[k as f64, -0.1, 0.0]).map_err(|e| e.to_string())?;
            if p.diag().iter().any(|d| *d < 0.5 * (k + 1) as f64) {
                return Err(format!("bound violated after {k} updates"));
            }
        }
        Ok("D >= delta (k + 1) for 50 updates".into())
    })()));

    out.push(outcome("finite-difference gradients", (|| {
        let e1 = fd_gradient_check(&mle, &[0.3, 7.0], 1e-6).map_err(|e| e.to_string())?;
        let q = Quadratic::uniform_saddle(5, 1.0, 2.0).map_err(|e| e.to_string())?.with_rotation(3);
        let e2 = fd_gradient_check(&q, &[0.1, -0.4, 0.8, 1.2, -2.0], 1e-5).map_err(|e| e.to_string())?;
        if e1 < 1e-4 && e2 < 1e-6 {
            Ok(format!("mle {e1:.1e}, saddle {e2:.1e}"))
        } else {
            Err(format!("mle {e1:.1e}, saddle {e2:.1e}"))
        }
    })()));

    out.push(outcome("trace sum at phi = 0", (|| {
        let cfg = MethodConfig::asg(eta, 1.0).with_delta(10.0);
        let opts = RunOptions::new(200).with_precond();
        let traces: Vec<_> = (1..=3)
            .map(|s| run_with(&mle, &cfg, Seeds::run(0, s), &opts))
            .collect::<crate::Result<_>>()
            .map_err(|e| e.to_string())?;
        let r = trace_sums(&traces, 0.0).map_err(|e| e.to_string())?;
        match r.ks.iter().zip(&r.sums).find(|(k, s)| **s != 2.0 * **k as f64) {
            None => Ok("S_k = d k exactly".into()),
            Some((k, s)) => Err(format!("S_{k} = {s}")),
        }
    })()));

    out.push(outcome("deterministic start rejected", (|| {
        let q = Quadratic::uniform_saddle(4, 1.0, 1.0).map_err(|e| e.to_string())?;
        let gd = MethodConfig::agld(0.1, 0.0, 1.0).with_sigma2(0.0);
        match measure_escape(&q, &gd, 10, 0.1, Seeds::run(0, 0)) {
            Err(_) => Ok("AGLD(sigma2=0) at the saddle is a configuration error".into()),
            Ok(_) => Err("accepted".into()),
        }
    })()));

    out.push(outcome("fixed point at the minimum", (|| {
        let q = Quadratic::convex(vec![0.5, 1.0, 2.0]).map_err(|e| e.to_string())?;
        let gd = MethodConfig::agld(0.1, 0.0, 1.0).with_sigma2(0.0);
        let t = run_with(&q, &gd, Seeds::run(0, 0), &RunOptions::new(1000).with_x0(ParamVector::zeros(3)))
            .map_err(|e| e.to_string())?;
        let dist = t.final_x.norm();
        if dist <= 1e-12 {
            Ok(format!("distance {dist:e} after 1000 steps"))
        } else {
            Err(format!("drifted to {dist:e}"))
        }
    })()));

    out.push(outcome("run determinism", (|| {
        let cfg = MethodConfig::asgld(eta, 1.0, 1.0).with_batch(crate::BatchSchedule::Constant(10));
        let a = run_with(&mle, &cfg, Seeds::run(0, 9), &RunOptions::new(200)).map_err(|e| e.to_string())?;
        let b = run_with(&mle, &cfg, Seeds::run(0, 9), &RunOptions::new(200)).map_err(|e| e.to_string())?;
        if a.to_csv_string() == b.to_csv_string() {
            Ok("identical CSV for identical seeds".into())
        } else {
            Err("reruns differ".into())
        }
    })()));
    out
}
