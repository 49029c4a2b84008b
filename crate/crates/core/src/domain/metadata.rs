use crate::domain::ParamVector;

/// Known facts about a problem. Every field is optional.
///
/// `lipschitz_m` is the gradient Lipschitz constant and `grad_var_c` bounds
/// the stochastic-gradient variance as `C / B`. The Hessian and function
/// Lipschitz constants, and any sub-Gaussian tail constants, have no runtime
/// role and may be recorded in `notes`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemMetadata {
    pub optimum: Option<ParamVector>,
    pub optimum_value: Option<f64>,
    pub lipschitz_m: Option<f64>,
    pub grad_var_c: Option<f64>,
    pub saddle_gamma: Option<f64>,
    pub notes: Vec<String>,
}

impl ProblemMetadata {
    /// Returns a warning when the step size violates `eta < 1/M`, or when
    /// `M` is unknown.
    pub fn step_size_warning(&self, eta: f64) -> Option<String> {
        match self.lipschitz_m {
            Some(m) if eta * m >= 1.0 => Some(format!(
                "step size {eta} is not below 1/M = {} (M = {m})",
                1.0 / m
            )),
            Some(_) => None,
            None => Some("gradient Lipschitz constant unknown; eta < 1/M not checked".into()),
        }
    }
}
