use std::fs::File;
use std::path::Path;

use super::experiment::{read_summary, SummaryRow};
use crate::diagnostics::{fit_rate_records, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::optimizers::{format_float, read_trace_csv, TraceRecord};

/// Re-fits rates from the trace files listed in a summary and carries the
/// escape rows over unchanged. `window = None` reuses the window recorded in
/// the summary.
pub fn refit_summary(summary: &Path, window: Option<f64>) -> Result<Vec<SummaryRow>> {
    let rows = read_summary(summary)?;
    let dir = summary.parent().unwrap_or_else(|| Path::new("."));
    let mut labels: Vec<(String, Vec<String>)> = Vec::new();
    for r in rows.iter().filter(|r| r.section == "run" && r.key == "trace_file") {
        match labels.iter_mut().find(|(l, _)| *l == r.label) {
            Some((_, files)) => files.push(r.value.clone()),
            None => labels.push((r.label.clone(), vec![r.value.clone()])),
        }
    }
    let mut out = Vec::new();
    for (label, files) in labels {
        let w = window.unwrap_or_else(|| {
            rows.iter()
                .find(|r| r.section == "rate" && r.label == label && r.key == "window")
                .and_then(SummaryRow::number)
                .unwrap_or(DEFAULT_WINDOW)
        });
        let series: Vec<Vec<TraceRecord>> = files
            .iter()
            .map(|f| {
                let path = dir.join(f);
                let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
                read_trace_csv(file)
            })
            .collect::<Result<_>>()?;
        let refs: Vec<&[TraceRecord]> = series.iter().map(Vec::as_slice).collect();
        let row = |k: &str, v: String| SummaryRow {
            section: "rate".into(),
            label: label.clone(),
            seed: None,
            dimension: None,
            key: k.into(),
            value: v,
        };
        match fit_rate_records(&refs, w) {
            Ok(f) => {
                out.push(row("window", format_float(f.window)));
                out.push(row("slope", format_float(f.slope)));
                out.push(row("intercept", format_float(f.intercept)));
                out.push(row("r_squared", format_float(f.r_squared)));
                out.push(row("seeds", f.seeds.to_string()));
            }
            Err(e) => out.push(row("skipped", e.to_string())),
        }
    }
    out.extend(
        rows.into_iter()
            .filter(|r| r.section == "escape" || r.section == "escape_fit"),
    );
    Ok(out)
}
