use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{check_dim, Problem};
use crate::domain::{ParamVector, ProblemMetadata};
use crate::error::{Error, Result};

/// Where runs start when no explicit `x0` is given.
#[derive(Debug, Clone, PartialEq)]
pub enum InitPoint {
    /// The stationary point at the origin.
    Origin,
    /// Each coordinate drawn i.i.d. from `N(0, scale²)`.
    Random { scale: f64 },
    Fixed(ParamVector),
}

/// `f(x) = ½ xᵀ H x` with `H = Q diag(λ) Qᵀ`.
///
/// With one negative eigenvalue `-γ` the origin is a `γ`-strict saddle; with
/// an all-positive spectrum the problem is a convex quadratic. The stochastic
/// oracle adds isotropic Gaussian noise with standard deviation
/// `noise_std / sqrt(B)`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    eigenvalues: Vec<f64>,
    /// Row-major `Q`, present only when a rotation was requested.
    rotation: Option<Vec<f64>>,
    /// Row-major dense Hessian, present only when rotated.
    hessian: Option<Vec<f64>>,
    noise_std: f64,
    init: InitPoint,
    metadata: ProblemMetadata,
    name: &'static str,
}

impl Quadratic {
    /// Strict saddle at the origin: eigenvalues `(-gamma, positive_spectrum...)`.
    pub fn saddle(gamma: f64, positive_spectrum: Vec<f64>) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::config(format!("gamma must be positive, got {gamma}")));
        }
        if positive_spectrum.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::config("saddle spectrum entries must be positive"));
        }
        let mut eigenvalues = Vec::with_capacity(positive_spectrum.len() + 1);
        eigenvalues.push(-gamma);
        eigenvalues.extend(positive_spectrum);
        let mut q = Self::from_eigenvalues(eigenvalues, "quadratic_saddle");
        q.metadata.saddle_gamma = Some(gamma);
        q.metadata.notes.push("unbounded below along the negative eigenvector".into());
        Ok(q)
    }

    /// Saddle in dimension `d` with every positive eigenvalue equal to `lambda`.
    pub fn uniform_saddle(d: usize, gamma: f64, lambda: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::config("a saddle needs dimension >= 2"));
        }
        Self::saddle(gamma, vec![lambda; d - 1])
    }

    /// Convex quadratic with minimum 0 at the origin.
    pub fn convex(spectrum: Vec<f64>) -> Result<Self> {
        if spectrum.is_empty() {
            return Err(Error::config("spectrum must be non-empty"));
        }
        if spectrum.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::config("convex spectrum entries must be positive"));
        }
        let d = spectrum.len();
        let mut q = Self::from_eigenvalues(spectrum, "convex_quadratic");
        q.metadata.optimum = Some(ParamVector::zeros(d));
        q.metadata.optimum_value = Some(0.0);
        q.init = InitPoint::Random { scale: 1.0 };
        Ok(q)
    }

    /// `d` eigenvalues spaced evenly over `[lo, hi]`.
    pub fn linspace_spectrum(d: usize, lo: f64, hi: f64) -> Vec<f64> {
        if d == 1 {
            return vec![lo];
        }
        (0..d)
            .map(|i| lo + (hi - lo) * i as f64 / (d - 1) as f64)
            .collect()
    }

    fn from_eigenvalues(eigenvalues: Vec<f64>, name: &'static str) -> Self {
        let m = eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
        let metadata = ProblemMetadata {
            lipschitz_m: Some(m),
            ..Default::default()
        };
        Self {
            eigenvalues,
            rotation: None,
            hessian: None,
            noise_std: 0.0,
            init: InitPoint::Origin,
            metadata,
            name,
        }
    }

    pub fn with_noise(mut self, noise_std: f64) -> Result<Self> {
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(Error::config(format!(
                "noise_std must be non-negative, got {noise_std}"
            )));
        }
        self.noise_std = noise_std;
        self.metadata.grad_var_c = if noise_std > 0.0 {
            Some(self.dim() as f64 * noise_std * noise_std)
        } else {
            None
        };
        Ok(self)
    }

    pub fn with_init(mut self, init: InitPoint) -> Self {
        self.init = init;
        self
    }

    /// Applies a seeded random orthogonal change of basis.
    pub fn with_rotation(mut self, seed: u64) -> Self {
        let d = self.dim();
        let q = random_orthogonal(d, seed);
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                h[i * d + j] = (0..d)
                    .map(|k| q[i * d + k] * self.eigenvalues[k] * q[j * d + k])
                    .sum();
            }
        }
        self.rotation = Some(q);
        self.hessian = Some(h);
        self
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn init(&self) -> &InitPoint {
        &self.init
    }

    pub fn is_rotated(&self) -> bool {
        self.rotation.is_some()
    }

    /// Smallest Hessian eigenvalue.
    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `H x`.
    pub fn hessian_times(&self, x: &[f64]) -> Vec<f64> {
        match &self.hessian {
            Some(h) => {
                let d = self.dim();
                (0..d)
                    .map(|i| h[i * d..(i + 1) * d].iter().zip(x).map(|(a, b)| a * b).sum())
                    .collect()
            }
            None => self.eigenvalues.iter().zip(x).map(|(l, v)| l * v).collect(),
        }
    }
}

impl Problem for Quadratic {
    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn objective(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        let hx = self.hessian_times(x);
        Ok(0.5 * hx.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x)?;
        Ok(self.hessian_times(x))
    }

    fn stochastic_gradient(
        &self,
        x: &[f64],
        batch: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<f64>> {
        if batch == 0 {
            return Err(Error::config("batch size must be >= 1"));
        }
        let mut g = self.gradient(x)?;
        if self.noise_std > 0.0 {
            let s = self.noise_std / (batch as f64).sqrt();
            for gi in g.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut *rng);
                *gi += s * z;
            }
        }
        Ok(g)
    }

    fn metadata(&self) -> &ProblemMetadata {
        &self.metadata
    }

    fn initial_point(&self, rng: &mut dyn RngCore) -> ParamVector {
        let d = self.dim();
        match &self.init {
            InitPoint::Origin => ParamVector::zeros(d),
            InitPoint::Fixed(x) => x.clone(),
            InitPoint::Random { scale } => {
                let v: Vec<f64> = (0..d)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut *rng);
                        scale * z
                    })
                    .collect();
                ParamVector::new(v).expect("dimension >= 1")
            }
        }
    }

    fn name(&self) -> &str {
        self.name
    }
}

/// Row-major orthogonal matrix from modified Gram-Schmidt on a Gaussian matrix.
fn random_orthogonal(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // columns stored contiguously while orthogonalizing
    let mut cols: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    for j in 0..d {
        for i in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let proj: f64 = done[i].iter().zip(&rest[0]).map(|(a, b)| a * b).sum();
            for (c, q) in rest[0].iter_mut().zip(&done[i]) {
                *c -= proj * q;
            }
        }
        let norm = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        for c in cols[j].iter_mut() {
            *c /= norm;
        }
    }
    let mut q = vec![0.0; d * d];
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            q[i * d + j] = *v;
        }
    }
    q
}
