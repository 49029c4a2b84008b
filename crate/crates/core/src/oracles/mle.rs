use rand::seq::index;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{check_dim, Problem};
use crate::domain::{ParamVector, ProblemMetadata};
use crate::error::{Error, Result};

pub const MLE_DEFAULT_SAMPLES: usize = 10_000;
pub const MLE_FLOOR: f64 = 1e-6;
/// Diagonal of the generating covariance.
pub const MLE_TRUE_VARIANCE: [f64; 2] = [0.1, 10.0];

/// Maximum-likelihood estimation of the two variances of a zero-mean,
/// axis-aligned bivariate Gaussian.
///
/// The per-sample loss is `log x1 + log x2 + y1²/x1 + y2²/x2`. The problem
/// objective is its sample mean; [`GaussianVarianceMle::objective_sum`] gives
/// the summed form. Iterates are clamped to `x >= floor` after every step.
#[derive(Debug, Clone)]
pub struct GaussianVarianceMle {
    squares: Vec<[f64; 2]>,
    mean_sq: [f64; 2],
    floor: f64,
    dataset_seed: Option<u64>,
    metadata: ProblemMetadata,
}

impl GaussianVarianceMle {
    /// Draws `n` samples from `N(0, diag(0.1, 10))` with the given dataset seed.
    pub fn new(n: usize, dataset_seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("sample count must be >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(dataset_seed);
        let sd = MLE_TRUE_VARIANCE.map(f64::sqrt);
        let samples: Vec<[f64; 2]> = (0..n)
            .map(|_| {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                [sd[0] * z1, sd[1] * z2]
            })
            .collect();
        let mut p = Self::from_samples(&samples)?;
        p.dataset_seed = Some(dataset_seed);
        Ok(p)
    }

    pub fn from_samples(samples: &[[f64; 2]]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::config("sample count must be >= 1"));
        }
        let squares: Vec<[f64; 2]> = samples.iter().map(|y| [y[0] * y[0], y[1] * y[1]]).collect();
        let n = squares.len() as f64;
        let mean_sq = [
            squares.iter().map(|s| s[0]).sum::<f64>() / n,
            squares.iter().map(|s| s[1]).sum::<f64>() / n,
        ];
        let optimum = ParamVector::new(mean_sq.to_vec())?;
        let optimum_value = 2.0 + mean_sq[0].ln() + mean_sq[1].ln();
        let metadata = ProblemMetadata {
            optimum: Some(optimum),
            optimum_value: Some(optimum_value),
            notes: vec![
                "gradient is not globally Lipschitz (pole at x = 0); M unknown".into(),
                "per-sample gradients are sub-exponential, not sub-Gaussian".into(),
            ],
            ..Default::default()
        };
        Ok(Self {
            squares,
            mean_sq,
            floor: MLE_FLOOR,
            dataset_seed: None,
            metadata,
        })
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn n(&self) -> usize {
        self.squares.len()
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn dataset_seed(&self) -> Option<u64> {
        self.dataset_seed
    }

    /// Sample means of `y1²` and `y2²`, the exact minimizer.
    pub fn mean_squares(&self) -> [f64; 2] {
        self.mean_sq
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        check_dim(2, x)?;
        if x.iter().all(|v| *v > 0.0) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "variance parameters must be positive, got ({}, {})",
                x[0], x[1]
            )))
        }
    }

    /// `Σ_i (log x1 + log x2 + y_i1²/x1 + y_i2²/x2)`.
    pub fn objective_sum(&self, x: &[f64]) -> Result<f64> {
        self.check_domain(x)?;
        let logs = x[0].ln() + x[1].ln();
        Ok(self
            .squares
            .iter()
            .map(|s| logs + s[0] / x[0] + s[1] / x[1])
            .sum())
    }

    fn gradient_from_mean(x: &[f64], m: [f64; 2]) -> Vec<f64> {
        vec![
            1.0 / x[0] - m[0] / (x[0] * x[0]),
            1.0 / x[1] - m[1] / (x[1] * x[1]),
        ]
    }
}

impl Problem for GaussianVarianceMle {
    fn dim(&self) -> usize {
        2
    }

    fn objective(&self, x: &[f64]) -> Result<f64> {
        self.check_domain(x)?;
        Ok(x[0].ln() + x[1].ln() + self.mean_sq[0] / x[0] + self.mean_sq[1] / x[1])
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        Ok(Self::gradient_from_mean(x, self.mean_sq))
    }

    fn stochastic_gradient(
        &self,
        x: &[f64],
        batch: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<f64>> {
        let n = self.n();
        if batch == 0 || batch > n {
            return Err(Error::config(format!(
                "batch size {batch} outside [1, {n}]"
            )));
        }
        if batch == n {
            return self.gradient(x);
        }
        self.check_domain(x)?;
        let mut acc = [0.0; 2];
        for i in index::sample(rng, n, batch) {
            acc[0] += self.squares[i][0];
            acc[1] += self.squares[i][1];
        }
        let b = batch as f64;
        Ok(Self::gradient_from_mean(x, [acc[0] / b, acc[1] / b]))
    }

    fn metadata(&self) -> &ProblemMetadata {
        &self.metadata
    }

    fn dataset_size(&self) -> Option<usize> {
        Some(self.n())
    }

    fn project(&self, x: &mut [f64]) -> bool {
        for v in x.iter_mut() {
            if *v < self.floor {
                *v = self.floor;
            }
        }
        true
    }

    /// Squared distance to the generating variances `(0.1, 10)`.
    fn error_metric(&self, x: &[f64]) -> Option<f64> {
        let a = x[0] - MLE_TRUE_VARIANCE[0];
        let b = x[1] - MLE_TRUE_VARIANCE[1];
        Some(a * a + b * b)
    }

    fn initial_point(&self, _rng: &mut dyn RngCore) -> ParamVector {
        ParamVector::filled(2, 1.0)
    }

    fn name(&self) -> &str {
        "gaussian_variance_mle"
    }
}
