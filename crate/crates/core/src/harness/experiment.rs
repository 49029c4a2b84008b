use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::spec::{to_raw, ExperimentSpec};
use crate::diagnostics::{
    decomposition, default_escape_threshold, escape_scaling, fit_rate, trace_sums, EscapeScaling,
};
use crate::domain::Method;
use crate::error::{Error, Result};
use crate::optimizers::{format_float, run_with, RunOptions, RunTrace, Seeds};
use crate::par::{par_map, with_jobs};
use crate::VERSION;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ASGLD_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "asgld-out";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

/// Trace sums summarized when diagonals are recorded.
const SUMMARY_PHIS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub section: String,
    pub label: String,
    pub seed: Option<u64>,
    pub dimension: Option<usize>,
    pub key: String,
    pub value: String,
}

impl SummaryRow {
    fn new(section: &str, label: &str, key: &str, value: impl Into<String>) -> Self {
        Self {
            section: section.into(),
            label: label.into(),
            seed: None,
            dimension: None,
            key: key.into(),
            value: value.into(),
        }
    }

    fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn dim(mut self, d: usize) -> Self {
        self.dimension = Some(d);
        self
    }

    pub fn number(&self) -> Option<f64> {
        self.value.parse().ok()
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub out_dir: PathBuf,
    pub trace_files: Vec<PathBuf>,
    /// `(label, seed, message)` for every run that stopped early.
    pub diverged: Vec<(String, u64, String)>,
    pub write_errors: Vec<String>,
    pub rows: Vec<SummaryRow>,
    pub escape: Vec<(String, EscapeScaling)>,
}

impl ExperimentReport {
    /// Exit status contract: success iff no run diverged and every file was written.
    pub fn success(&self) -> bool {
        self.diverged.is_empty() && self.write_errors.is_empty()
    }

    /// Short human-readable digest of the summary.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "output: {}", self.out_dir.display());
        let _ = writeln!(s, "trace files: {}", self.trace_files.len());
        for r in self.rows.iter().filter(|r| r.section == "rate") {
            if r.key == "slope" || r.key == "r_squared" {
                let _ = writeln!(s, "rate  {:<10} {:<10} {}", r.label, r.key, short(&r.value));
            }
        }
        for r in self.rows.iter().filter(|r| r.section == "tracesum") {
            if let Some(phi) = r.key.strip_prefix("exponent_phi") {
                let _ = writeln!(s, "trace {:<10} phi={phi:<4} exponent {}", r.label, short(&r.value));
            }
        }
        for (label, sc) in &self.escape {
            for c in &sc.cells {
                let med = c.median_step.map_or("n/a".into(), |m| format!("{m}"));
                let _ = writeln!(
                    s,
                    "escape {label:<9} d={:<5} median {med:<8} escaped {}/{}",
                    c.dimension, c.escaped, c.replicates
                );
            }
            match &sc.fits {
                Some(f) => {
                    let _ = writeln!(
                        s,
                        "escape {label:<9} log fit a={:.3} b={:.3} resid={:.4}; power fit c={:.3} p={:.3} resid={:.4}",
                        f.log_model.scale,
                        f.log_model.shape,
                        f.log_model.residual,
                        f.power_model.scale,
                        f.power_model.shape,
                        f.power_model.residual
                    );
                }
                None => {
                    let _ = writeln!(s, "escape {label:<9} too few escaped dimensions to fit");
                }
            }
        }
        for (l, seed, msg) in &self.diverged {
            let _ = writeln!(s, "DIVERGED {l} seed {seed}: {msg}");
        }
        for e in &self.write_errors {
            let _ = writeln!(s, "WRITE FAILED {e}");
        }
        s
    }
}

fn short(v: &str) -> String {
    v.parse::<f64>().map_or(v.to_string(), |x| format!("{x:.4}"))
}

pub fn trace_file_name(label: &str, seed: u64) -> String {
    format!("{label}_seed{seed}.csv")
}

/// Writes the manifest: the resolved spec, a version line and notes on
/// choices the configuration leaves implicit.
pub fn manifest_text(spec: &ExperimentSpec) -> String {
    let mut table = to_raw(spec);
    let mut m = toml::Table::new();
    m.insert("version".into(), format!("asgld-core {VERSION}").into());
    let mut notes: Vec<toml::Value> = Vec::new();
    if spec
        .methods
        .iter()
        .any(|(_, c)| c.method == Method::Sgld && c.eta_schedule != crate::domain::StepSchedule::Constant)
    {
        notes.push("SGLD noise scale follows the decaying step: sqrt(2 eta_t sigma2 / u)".into());
    }
    if spec.methods.iter().any(|(_, c)| c.method.injects_noise()) {
        notes.push("sigma2 and eta are configuration choices, not values taken from a reference experiment".into());
    }
    if let Ok(problem) = spec.problem.build(spec.dataset_seed) {
        if problem.metadata().lipschitz_m.is_none() {
            notes.push("smoothness constant M unknown for this problem; eta < 1/M cannot be checked".into());
        }
    }
    m.insert("notes".into(), toml::Value::Array(notes));
    table.insert("manifest".into(), toml::Value::Table(m));
    toml::to_string(&table).expect("manifest serializes")
}

fn write_file(path: &Path, content: &[u8], errors: &mut Vec<String>) -> bool {
    match fs::write(path, content) {
        Ok(()) => true,
        Err(e) => {
            errors.push(format!("{}: {e}", path.display()));
            false
        }
    }
}

/// Runs every `(label, seed)` pair, then writes traces, the summary and the
/// manifest in label/seed order. `jobs = 0` uses every core.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path, jobs: usize) -> Result<ExperimentReport> {
    let problem = spec.problem.build(spec.dataset_seed)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let exec = &spec.execution;
    let mut opts = RunOptions::new(exec.budget).with_metric_every(exec.metric_every);
    if exec.record_precond {
        opts = opts.with_precond();
    }

    let grid: Vec<(usize, u64)> = (0..spec.methods.len())
        .flat_map(|i| exec.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let (traces, escapes) = with_jobs(jobs, || -> Result<_> {
        let traces = par_map(&grid, |&(i, seed)| {
            run_with(
                problem.as_ref(),
                &spec.methods[i].1,
                Seeds::run(spec.dataset_seed, seed),
                &opts,
            )
        });
        let traces: Vec<RunTrace> = traces.into_iter().collect::<Result<_>>()?;
        let mut escapes = Vec::new();
        if let (Some(esc), Some(family)) = (&spec.escape, spec.problem.saddle_family()) {
            let delta = esc.threshold.unwrap_or(default_escape_threshold(family.gamma));
            for (label, cfg) in &spec.methods {
                let sc = escape_scaling(
                    &esc.dims,
                    family,
                    cfg,
                    esc.replicates,
                    esc.budget,
                    delta,
                    esc.seed,
                )?;
                escapes.push((label.clone(), sc));
            }
        }
        Ok((traces, escapes))
    })?;

    let mut report = ExperimentReport {
        out_dir: out_dir.to_path_buf(),
        trace_files: Vec::new(),
        diverged: Vec::new(),
        write_errors: Vec::new(),
        rows: Vec::new(),
        escape: Vec::new(),
    };
    let n_seeds = exec.seeds.len();
    for (idx, t) in traces.iter().enumerate() {
        let (i, seed) = grid[idx];
        let label = &spec.methods[i].0;
        let name = trace_file_name(label, seed);
        let path = out_dir.join(&name);
        if write_file(&path, t.to_csv_string().as_bytes(), &mut report.write_errors) {
            report.trace_files.push(path);
        }
        if let Some(d) = &t.divergence {
            report.diverged.push((label.clone(), seed, d.message.clone()));
        }
        let last = t.last();
        let row = |k: &str, v: String| SummaryRow::new("run", label, k, v).seed(seed);
        report.rows.push(row("trace_file", name));
        report.rows.push(row(
            "status",
            if t.diverged() { "diverged" } else { "ok" }.into(),
        ));
        if let Some(d) = &t.divergence {
            report.rows.push(row("divergence_step", d.step.to_string()));
        }
        report.rows.push(row("final_k", last.k.to_string()));
        report.rows.push(row("final_f", format_float(last.f)));
        report.rows.push(row("final_grad_norm", format_float(last.grad_norm)));
        report.rows.push(row("min_grad_sq", format_float(last.min_grad_sq)));
        if let Some(e) = last.err_metric {
            report.rows.push(row("err_metric", format_float(e)));
        }
        if t.batch_capped {
            report.rows.push(row("batch_capped", "true".into()));
        }
        for w in &t.warnings {
            report.rows.push(row("warning", w.clone()));
        }
    }

    for (i, (label, _)) in spec.methods.iter().enumerate() {
        let group = &traces[i * n_seeds..(i + 1) * n_seeds];
        report.rows.extend(diagnostic_rows(label, group, spec, exec.rate_window, problem.as_ref()));
    }

    for (label, sc) in &escapes {
        report.rows.push(SummaryRow::new("escape_fit", label, "threshold", format_float(sc.threshold)));
        for c in &sc.cells {
            let r = |k: &str, v: String| SummaryRow::new("escape", label, k, v).dim(c.dimension);
            report.rows.push(r("replicates", c.replicates.to_string()));
            report.rows.push(r("escaped", c.escaped.to_string()));
            report.rows.push(r("flagged", c.flagged().to_string()));
            if let Some(m) = c.median_step {
                report.rows.push(r("median_step", format_float(m)));
            }
        }
        if let Some(f) = &sc.fits {
            let r = |k: &str, v: f64| SummaryRow::new("escape_fit", label, k, format_float(v));
            report.rows.push(r("log_a", f.log_model.scale));
            report.rows.push(r("log_b", f.log_model.shape));
            report.rows.push(r("log_residual", f.log_model.residual));
            report.rows.push(r("power_c", f.power_model.scale));
            report.rows.push(r("power_p", f.power_model.shape));
            report.rows.push(r("power_residual", f.power_model.residual));
        }
    }
    report.escape = escapes;

    let summary_path = out_dir.join(SUMMARY_FILE);
    match write_summary(&summary_path, &report.rows) {
        Ok(()) => {}
        Err(e) => report.write_errors.push(e.to_string()),
    }
    let manifest_path = out_dir.join(MANIFEST_FILE);
    write_file(&manifest_path, manifest_text(spec).as_bytes(), &mut report.write_errors);
    Ok(report)
}

fn diagnostic_rows(
    label: &str,
    group: &[RunTrace],
    spec: &ExperimentSpec,
    window: f64,
    problem: &dyn crate::oracles::Problem,
) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    let note = |rows: &mut Vec<SummaryRow>, section: &str, e: Error| {
        rows.push(SummaryRow::new(section, label, "skipped", e.to_string()));
    };
    if group.len() >= 3 {
        match fit_rate(group, window) {
            Ok(f) => {
                for (k, v) in [
                    ("window", f.window),
                    ("slope", f.slope),
                    ("intercept", f.intercept),
                    ("r_squared", f.r_squared),
                ] {
                    rows.push(SummaryRow::new("rate", label, k, format_float(v)));
                }
                rows.push(SummaryRow::new("rate", label, "seeds", f.seeds.to_string()));
            }
            Err(e) => note(&mut rows, "rate", e),
        }
    }
    if spec.execution.record_precond && spec.execution.metric_every == 1 {
        for phi in SUMMARY_PHIS {
            match trace_sums(group, phi) {
                Ok(r) => {
                    let key = |k: &str| format!("{k}_phi{phi}");
                    rows.push(SummaryRow::new("tracesum", label, &key("exponent"), format_float(r.exponent())));
                    rows.push(SummaryRow::new("tracesum", label, &key("r_squared"), format_float(r.fit.r_squared)));
                    rows.push(SummaryRow::new(
                        "tracesum",
                        label,
                        &key("final_sum"),
                        format_float(*r.sums.last().unwrap()),
                    ));
                }
                Err(e) => note(&mut rows, "tracesum", e),
            }
        }
        match decomposition(group, problem.metadata()) {
            Ok(d) => {
                let last = d.ks.len() - 1;
                for (name, series, exp) in [
                    ("i1", &d.i1, d.decay_exponents[0]),
                    ("i2", &d.i2, d.decay_exponents[1]),
                    ("i3", &d.i3, d.decay_exponents[2]),
                ] {
                    rows.push(SummaryRow::new("decomposition", label, &format!("{name}_final"), format_float(series[last])));
                    if let Some(x) = exp {
                        rows.push(SummaryRow::new("decomposition", label, &format!("{name}_decay"), format_float(x)));
                    }
                }
                rows.push(SummaryRow::new("decomposition", label, "unnormalized", d.unnormalized.to_string()));
            }
            Err(e) => note(&mut rows, "decomposition", e),
        }
    }
    rows
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows: std::result::Result<Vec<SummaryRow>, _> = r.deserialize().collect();
    Ok(rows?)
}
