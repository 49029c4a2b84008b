//! Diagonal squared-gradient accumulator.
//!
//! The accumulator starts at `delta` on every coordinate and each update adds
//! the element-wise squared gradient plus another `delta`. After `k` updates
//! every entry is therefore at least `delta * (k + 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preconditioner {
    diag: Vec<f64>,
    delta: f64,
    step_count: u64,
}

impl Preconditioner {
    pub fn new(d: usize, delta: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::config("preconditioner dimension must be >= 1"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::config(format!("delta must be positive, got {delta}")));
        }
        Ok(Self {
            diag: vec![delta; d],
            delta,
            step_count: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Adds `g ⋆ g + delta` to the diagonal.
    pub fn update(&mut self, g: &[f64]) -> Result<()> {
        if g.len() != self.diag.len() {
            return Err(Error::contract(format!(
                "gradient has dimension {}, preconditioner has {}",
                g.len(),
                self.diag.len()
            )));
        }
        if let Some(pos) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                step: self.step_count as usize,
                msg: format!("non-finite gradient entry {} at coordinate {pos}", g[pos]),
            });
        }
        for (d, gi) in self.diag.iter_mut().zip(g) {
            *d += gi * gi + self.delta;
        }
        self.step_count += 1;
        Ok(())
    }

    /// Element-wise `diag^(-phi)`. `phi == 0` yields exact ones.
    pub fn power(&self, phi: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.diag.len()];
        self.power_into(phi, &mut out);
        out
    }

    pub fn power_into(&self, phi: f64, out: &mut [f64]) {
        diag_power_into(&self.diag, phi, out);
    }

    /// `Tr(D^(-phi))`.
    pub fn trace_power(&self, phi: f64) -> f64 {
        trace_power(&self.diag, phi)
    }
}

pub(crate) fn diag_power_into(diag: &[f64], phi: f64, out: &mut [f64]) {
    if phi == 0.0 {
        out.fill(1.0);
        return;
    }
    for (o, d) in out.iter_mut().zip(diag) {
        *o = if phi == 0.5 {
            1.0 / d.sqrt()
        } else if phi == 1.0 {
            1.0 / d
        } else {
            d.powf(-phi)
        };
    }
}

pub(crate) fn trace_power(diag: &[f64], phi: f64) -> f64 {
    if phi == 0.0 {
        return diag.len() as f64;
    }
    diag.iter()
        .map(|d| {
            if phi == 0.5 {
                1.0 / d.sqrt()
            } else if phi == 1.0 {
                1.0 / d
            } else {
                d.powf(-phi)
            }
        })
        .sum()
}
