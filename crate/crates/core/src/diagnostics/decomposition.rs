use super::rate::common_steps;
use super::regression::{fit_log_log, tail_start};
use super::tracesum::per_seed_increments;
use crate::domain::{trace_power, ProblemMetadata};
use crate::error::{Error, Result};
use crate::optimizers::RunTrace;

/// Empirical bound terms at each step `k = 1..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub ks: Vec<usize>,
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
    pub i3: Vec<f64>,
    pub lipschitz_m: f64,
    pub grad_var_c: f64,
    /// Set when `M` or `C` fell back to 1.
    pub unnormalized: bool,
    /// Tail-window log-log slopes of `(I1, I2, I3)`; `None` for a term that
    /// is identically zero in the window.
    pub decay_exponents: [Option<f64>; 3],
}

impl DecompositionReport {
    pub fn bound(&self, i: usize) -> f64 {
        self.i1[i] + self.i2[i] + self.i3[i]
    }
}

pub fn decomposition(traces: &[RunTrace], metadata: &ProblemMetadata) -> Result<DecompositionReport> {
    let first = traces.first().ok_or_else(|| Error::contract("no traces given"))?;
    let cfg = &first.config;
    let a = 2.0 * cfg.gradient_exponent();
    let noise_b = cfg.noise_exponent().map(|h| 2.0 * h);
    let s2 = cfg.effective_sigma2();
    let eta = cfg.eta;

    let (den_per, steps) = per_seed_increments(traces, a / 2.0)?;
    let ks_rec = common_steps(traces)?;
    let steps = steps.min(ks_rec.len().saturating_sub(1));
    if steps == 0 {
        return Err(Error::contract("decomposition needs at least one step"));
    }
    let n = traces.len() as f64;

    let (m, m_given) = match metadata.lipschitz_m {
        Some(m) => (m, true),
        None => (1.0, false),
    };
    let (c, c_given) = match metadata.grad_var_c {
        Some(c) => (c, true),
        None => (1.0, false),
    };
    let with_i2 = !cfg.method.uses_full_gradient();
    let with_i3 = noise_b.is_some() && s2 > 0.0;

    let f0 = traces.iter().map(|t| t.records[0].f).sum::<f64>() / n;
    let mut den = 0.0;
    let mut num2 = 0.0;
    let mut num3 = 0.0;
    let mut out = DecompositionReport {
        ks: Vec::with_capacity(steps),
        i1: Vec::with_capacity(steps),
        i2: Vec::with_capacity(steps),
        i3: Vec::with_capacity(steps),
        lipschitz_m: m,
        grad_var_c: c,
        unnormalized: !(m_given && c_given),
        decay_exponents: [None; 3],
    };
    for j in 0..steps {
        den += den_per.iter().map(|p| p[j]).sum::<f64>() / n;
        if with_i2 {
            num2 += traces
                .iter()
                .map(|t| {
                    let b = t.records[j].batch.max(1) as f64;
                    trace_power(&t.precond_diags.as_ref().unwrap()[j], a) / b
                })
                .sum::<f64>()
                / n;
        }
        if let (true, Some(b)) = (with_i3, noise_b) {
            num3 += traces
                .iter()
                .map(|t| trace_power(&t.precond_diags.as_ref().unwrap()[j], b))
                .sum::<f64>()
                / n;
        }
        let fk = traces.iter().map(|t| t.records[j + 1].f).sum::<f64>() / n;
        out.ks.push(j + 1);
        out.i1.push((2.0 / eta * (f0 - fk)).max(0.0) / den);
        out.i2.push(m * eta * c * num2 / den);
        out.i3.push(2.0 * m * s2 * num3 / den);
    }

    let start = tail_start(&out.ks, super::DEFAULT_WINDOW);
    let kx: Vec<f64> = out.ks[start..].iter().map(|&k| k as f64).collect();
    for (slot, series) in out
        .decay_exponents
        .iter_mut()
        .zip([&out.i1, &out.i2, &out.i3])
    {
        let tail = &series[start..];
        if tail.iter().all(|v| *v > 0.0) {
            *slot = fit_log_log(&kx, tail).map(|f| f.slope);
        }
    }
    Ok(out)
}
