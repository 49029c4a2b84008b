use super::Problem;
use crate::error::{Error, Result};

/// Denominator floor so that vanishing gradient components compare absolutely.
const REL_FLOOR: f64 = 1e-6;

/// Largest per-coordinate relative error between central finite differences
/// of the objective and the analytic gradient at `x`.
pub fn fd_gradient_check(problem: &dyn Problem, x: &[f64], h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config(format!("finite-difference step must be positive, got {h}")));
    }
    let g = problem.gradient(x)?;
    let mut probe = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let fp = problem.objective(&probe)?;
        probe[i] = x[i] - h;
        let fm = problem.objective(&probe)?;
        probe[i] = x[i];
        let fd = (fp - fm) / (2.0 * h);
        let denom = g[i].abs().max(fd.abs()).max(REL_FLOOR);
        worst = worst.max((fd - g[i]).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::domain::{ParamVector, ProblemMetadata};
    use crate::oracles::{GaussianVarianceMle, Quadratic};

    struct Flat(ProblemMetadata);

    impl Problem for Flat {
        fn dim(&self) -> usize {
            3
        }
        fn objective(&self, _x: &[f64]) -> Result<f64> {
            Ok(4.2)
        }
        fn gradient(&self, _x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![0.0; 3])
        }
        fn stochastic_gradient(&self, x: &[f64], _b: usize, _r: &mut dyn RngCore) -> Result<Vec<f64>> {
            self.gradient(x)
        }
        fn metadata(&self) -> &ProblemMetadata {
            &self.0
        }
        fn initial_point(&self, _rng: &mut dyn RngCore) -> ParamVector {
            ParamVector::zeros(3)
        }
        fn name(&self) -> &str {
            "flat"
        }
    }

    #[test]
    fn constant_problem_has_zero_error() {
        let p = Flat(ProblemMetadata::default());
        assert_eq!(fd_gradient_check(&p, &[1.0, -2.0, 3.0], 1e-5).unwrap(), 0.0);
    }

    #[test]
    fn quadratic_is_near_exact() {
        let q = Quadratic::saddle(1.0, vec![0.5, 2.0, 3.0]).unwrap().with_rotation(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = Quadratic::convex(vec![1.0; 4])
            .unwrap()
            .initial_point(&mut rng);
        assert!(fd_gradient_check(&q, &x, 1e-5).unwrap() < 1e-6);
    }

    #[test]
    fn mle_at_interior_point() {
        let p = GaussianVarianceMle::new(10_000, 1).unwrap();
        assert!(fd_gradient_check(&p, &[1.0, 5.0], 1e-6).unwrap() < 1e-4);
    }

    #[test]
    fn domain_violation_propagates() {
        let p = GaussianVarianceMle::new(10, 1).unwrap();
        assert!(matches!(
            fd_gradient_check(&p, &[1e-7, 5.0], 1e-6),
            Err(Error::Domain(_))
        ));
    }
}
