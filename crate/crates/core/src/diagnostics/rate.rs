use super::regression::{fit_log_log, tail_start};
use crate::error::{Error, Result};
use crate::optimizers::{RunTrace, TraceRecord};

/// Default tail fraction used for rate fits.
pub const DEFAULT_WINDOW: f64 = 0.5;

/// Power-law fit of the seed-averaged running minimum of `‖∇f‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub window: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub seeds: usize,
    pub points: usize,
}

pub(crate) fn check_same_config(traces: &[RunTrace]) -> Result<()> {
    let first = &traces[0];
    for t in &traces[1..] {
        if t.config != first.config || t.problem != first.problem {
            return Err(Error::contract(format!(
                "traces mix configurations ({} on {} vs {} on {})",
                first.config.method.name(),
                first.problem,
                t.config.method.name(),
                t.problem
            )));
        }
    }
    Ok(())
}

/// Record steps shared by every trace (a diverged trace truncates the set).
pub(crate) fn common_steps(traces: &[RunTrace]) -> Result<Vec<usize>> {
    let series: Vec<&[TraceRecord]> = traces.iter().map(|t| t.records.as_slice()).collect();
    common_record_steps(&series)
}

fn common_record_steps(series: &[&[TraceRecord]]) -> Result<Vec<usize>> {
    let n = series.iter().map(|t| t.len()).min().unwrap_or(0);
    let ks: Vec<usize> = series[0][..n].iter().map(|r| r.k).collect();
    for t in &series[1..] {
        if t[..n].iter().map(|r| r.k).ne(ks.iter().copied()) {
            return Err(Error::contract("traces were recorded at different steps"));
        }
    }
    Ok(ks)
}

/// Fits `log mean_seeds(min_{j<=k} ‖∇f(x_j)‖²)` against `log k` over the
/// last `window` fraction of the run.
pub fn fit_rate(traces: &[RunTrace], window: f64) -> Result<RateFit> {
    if traces.len() < 3 {
        return Err(Error::contract(format!(
            "rate fits need at least 3 traces, got {}",
            traces.len()
        )));
    }
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::config(format!("window must lie in (0, 1], got {window}")));
    }
    check_same_config(traces)?;
    let series: Vec<&[TraceRecord]> = traces.iter().map(|t| t.records.as_slice()).collect();
    fit_rate_records(&series, window)
}

/// [`fit_rate`] on bare record series (for example traces read back from CSV);
/// the caller vouches that they share a configuration.
pub fn fit_rate_records(series: &[&[TraceRecord]], window: f64) -> Result<RateFit> {
    if series.len() < 3 {
        return Err(Error::contract(format!(
            "rate fits need at least 3 traces, got {}",
            series.len()
        )));
    }
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::config(format!("window must lie in (0, 1], got {window}")));
    }
    let ks = common_record_steps(series)?;
    let start = tail_start(&ks, window);
    let n = series.len() as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &k) in ks.iter().enumerate().skip(start) {
        let mean = series.iter().map(|t| t[i].min_grad_sq).sum::<f64>() / n;
        xs.push(k as f64);
        ys.push(mean);
    }
    let fit = fit_log_log(&xs, &ys)
        .ok_or_else(|| Error::contract("too few positive points in the fit window"))?;
    Ok(RateFit {
        window,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        seeds: series.len(),
        points: xs.len(),
    })
}
