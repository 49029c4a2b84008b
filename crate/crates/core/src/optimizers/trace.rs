use std::io::Write;

use crate::domain::{MethodConfig, ParamVector};
use crate::error::Result;

/// Three independent seeds: the dataset draw, the gradient oracle stream and
/// the injected-noise stream (which also seeds random starting points).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seeds {
    pub dataset: u64,
    pub oracle: u64,
    pub noise: u64,
}

impl Seeds {
    pub fn new(dataset: u64, oracle: u64, noise: u64) -> Self {
        Self {
            dataset,
            oracle,
            noise,
        }
    }

    /// Same run seed for the oracle and noise streams (they still draw from
    /// distinct ChaCha streams).
    pub fn run(dataset: u64, seed: u64) -> Self {
        Self::new(dataset, seed, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub f: f64,
    pub grad_norm: f64,
    /// `min_{j <= k} ||∇f(x_j)||²` over recorded steps.
    pub min_grad_sq: f64,
    /// Batch size used by the step taken from `x_k`.
    pub batch: usize,
    pub err_metric: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub step: usize,
    pub message: String,
}

/// Reproducible record of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub problem: String,
    pub config: MethodConfig,
    pub seeds: Seeds,
    pub budget: usize,
    pub metric_every: usize,
    pub x0: ParamVector,
    pub final_x: ParamVector,
    pub records: Vec<TraceRecord>,
    /// Preconditioner diagonal applied at each recorded step, when requested.
    pub precond_diags: Option<Vec<Vec<f64>>>,
    pub divergence: Option<Divergence>,
    /// Whether any scheduled batch exceeded the dataset size and was capped.
    pub batch_capped: bool,
    pub warnings: Vec<String>,
}

pub const CSV_HEADER: [&str; 6] = ["k", "f", "grad_norm", "min_grad_sq", "batch", "err_metric"];

/// Round-trip float formatting with 17 significant digits.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

impl RunTrace {
    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace always holds the initial record")
    }

    pub fn dim(&self) -> usize {
        self.x0.dim()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.k.to_string(),
                format_float(r.f),
                format_float(r.grad_norm),
                format_float(r.min_grad_sq),
                r.batch.to_string(),
                r.err_metric.map(format_float).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| crate::Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Parses a trace CSV back into records.
pub fn read_trace_csv<R: std::io::Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(crate::Error::Parse {
            context: "trace csv header".into(),
            msg: format!("expected {}", CSV_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row?;
        let field = |i: usize| -> Result<f64> {
            row[i].parse::<f64>().map_err(|e| crate::Error::Parse {
                context: format!("trace csv row {}, column {}", line + 2, CSV_HEADER[i]),
                msg: e.to_string(),
            })
        };
        out.push(TraceRecord {
            k: field(0)? as usize,
            f: field(1)?,
            grad_norm: field(2)?,
            min_grad_sq: field(3)?,
            batch: field(4)? as usize,
            err_metric: if row[5].is_empty() { None } else { Some(field(5)?) },
        });
    }
    Ok(out)
}
