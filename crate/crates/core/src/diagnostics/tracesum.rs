use super::rate::check_same_config;
use super::regression::{fit_line, fit_log_log, mean_and_stderr, tail_start, LineFit};
use crate::domain::trace_power;
use crate::error::{Error, Result};
use crate::optimizers::RunTrace;

/// Which regression produced [`TraceSumReport::fit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthModel {
    /// `log S_k` against `log k` (φ < 1).
    Power,
    /// `S_k` against `ln k` (φ = 1).
    Logarithmic,
    /// `log(k · ΔS_k)` against `log k` (φ > 1, where `S_k` saturates).
    ScaledIncrement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSumReport {
    pub phi: f64,
    /// `ks[i] = i + 1`.
    pub ks: Vec<usize>,
    /// Seed-averaged `S_k = Σ_{j<k} Tr(D_j^{-φ})` with `D_j` the accumulator
    /// used by step `j`.
    pub sums: Vec<f64>,
    pub std_err: Vec<f64>,
    pub model: GrowthModel,
    pub fit: LineFit,
    /// The growth exponent the fit is compared against (`1 - φ`), absent
    /// for the logarithmic case.
    pub predicted_exponent: Option<f64>,
}

impl TraceSumReport {
    /// Fitted growth exponent (slope of the chosen regression).
    pub fn exponent(&self) -> f64 {
        self.fit.slope
    }
}

/// Per-trace increments `Tr(D_j^{-φ})` for `j = 0..K`.
pub(crate) fn increments(t: &RunTrace, phi: f64) -> Result<Vec<f64>> {
    let diags = t.precond_diags.as_ref().ok_or_else(|| {
        Error::contract("trace was recorded without preconditioner diagonals")
    })?;
    if t.metric_every != 1 {
        return Err(Error::contract(
            "trace sums need every step recorded (metric_every = 1)",
        ));
    }
    Ok(diags.iter().map(|d| trace_power(d, phi)).collect())
}

pub(crate) fn per_seed_increments(traces: &[RunTrace], phi: f64) -> Result<(Vec<Vec<f64>>, usize)> {
    if traces.is_empty() {
        return Err(Error::contract("no traces given"));
    }
    check_same_config(traces)?;
    let per: Vec<Vec<f64>> = traces
        .iter()
        .map(|t| increments(t, phi))
        .collect::<Result<_>>()?;
    // Step j uses diagonal j; the last recorded diagonal is never used.
    let steps = per.iter().map(|v| v.len()).min().unwrap_or(0).saturating_sub(1);
    Ok((per, steps))
}

pub fn trace_sums(traces: &[RunTrace], phi: f64) -> Result<TraceSumReport> {
    trace_sums_window(traces, phi, super::DEFAULT_WINDOW)
}

pub fn trace_sums_window(traces: &[RunTrace], phi: f64, window: f64) -> Result<TraceSumReport> {
    if !(phi >= 0.0 && phi.is_finite()) {
        return Err(Error::config(format!("phi must be non-negative, got {phi}")));
    }
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::config(format!("window must lie in (0, 1], got {window}")));
    }
    let (per, steps) = per_seed_increments(traces, phi)?;
    if steps < 3 {
        return Err(Error::contract("trace sums need at least 3 steps"));
    }
    let n = per.len();
    let mut running = vec![0.0; n];
    let mut ks = Vec::with_capacity(steps);
    let mut sums = Vec::with_capacity(steps);
    let mut std_err = Vec::with_capacity(steps);
    let mut incr = Vec::with_capacity(steps);
    for j in 0..steps {
        for (s, p) in running.iter_mut().zip(&per) {
            *s += p[j];
        }
        let (m, se) = mean_and_stderr(&running);
        ks.push(j + 1);
        sums.push(m);
        std_err.push(se);
        incr.push(per.iter().map(|p| p[j]).sum::<f64>() / n as f64);
    }

    let start = tail_start(&ks, window);
    let kx: Vec<f64> = ks[start..].iter().map(|&k| k as f64).collect();
    let (model, fit, predicted) = if (phi - 1.0).abs() < 1e-12 {
        let lx: Vec<f64> = kx.iter().map(|k| k.ln()).collect();
        (GrowthModel::Logarithmic, fit_line(&lx, &sums[start..]), None)
    } else if phi < 1.0 {
        (GrowthModel::Power, fit_log_log(&kx, &sums[start..]), Some(1.0 - phi))
    } else {
        // Increment j enters S_{j+1}, so pair increment j with k = j + 1.
        let scaled: Vec<f64> = kx.iter().zip(&incr[start..]).map(|(k, v)| k * v).collect();
        (GrowthModel::ScaledIncrement, fit_log_log(&kx, &scaled), Some(1.0 - phi))
    };
    let fit = fit.ok_or_else(|| Error::contract("degenerate trace-sum window"))?;
    Ok(TraceSumReport {
        phi,
        ks,
        sums,
        std_err,
        model,
        fit,
        predicted_exponent: predicted,
    })
}
