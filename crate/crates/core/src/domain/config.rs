use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The five step rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Asgld,
    Agld,
    Asg,
    Sgld,
    Sgd,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Asgld,
        Method::Agld,
        Method::Asg,
        Method::Sgld,
        Method::Sgd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Asgld => "ASGLD",
            Method::Agld => "AGLD",
            Method::Asg => "ASG",
            Method::Sgld => "SGLD",
            Method::Sgd => "SGD",
        }
    }

    /// Full-gradient methods never call the stochastic oracle.
    pub fn uses_full_gradient(self) -> bool {
        matches!(self, Method::Agld)
    }

    pub fn injects_noise(self) -> bool {
        matches!(self, Method::Asgld | Method::Agld | Method::Sgld)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown method kind `{s}` (expected one of ASGLD, AGLD, ASG, SGLD, SGD)"
                ))
            })
    }
}

/// Exponent applied to the preconditioner on the injected-noise term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseExponent {
    Finite(f64),
    /// `beta = ∞`: the noise term is skipped entirely.
    NoNoise,
}

impl NoiseExponent {
    pub fn value(self) -> Option<f64> {
        match self {
            NoiseExponent::Finite(b) => Some(b),
            NoiseExponent::NoNoise => None,
        }
    }
}

impl fmt::Display for NoiseExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseExponent::Finite(b) => write!(f, "{b}"),
            NoiseExponent::NoNoise => f.write_str("none"),
        }
    }
}

/// Mini-batch size as a function of the step index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BatchSchedule {
    Constant(usize),
    /// `ceil(c * (k + 1)^theta)`
    PowerLaw { c: f64, theta: f64 },
    /// `ceil(c * (k + 1))`
    Linear { c: f64 },
}

impl BatchSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            BatchSchedule::Constant(b) => b >= 1,
            BatchSchedule::PowerLaw { c, theta } => c > 0.0 && c.is_finite() && theta.is_finite(),
            BatchSchedule::Linear { c } => c > 0.0 && c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid batch schedule {self}")))
        }
    }

    /// Batch size at step `k` (uncapped, always >= 1).
    pub fn size(&self, k: usize) -> usize {
        let raw = match *self {
            BatchSchedule::Constant(b) => return b.max(1),
            BatchSchedule::PowerLaw { c, theta } => (c * ((k + 1) as f64).powf(theta)).ceil(),
            BatchSchedule::Linear { c } => (c * (k + 1) as f64).ceil(),
        };
        if raw >= usize::MAX as f64 {
            usize::MAX
        } else {
            (raw as usize).max(1)
        }
    }
}

impl fmt::Display for BatchSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BatchSchedule::Constant(b) => write!(f, "constant({b})"),
            BatchSchedule::PowerLaw { c, theta } => write!(f, "power({c}, {theta})"),
            BatchSchedule::Linear { c } => write!(f, "linear({c})"),
        }
    }
}

impl FromStr for BatchSchedule {
    type Err = Error;

    /// Accepts `constant(B)`, `linear(c)`, `power(c, theta)` or a bare integer.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::config(format!("cannot parse batch schedule `{s}`"));
        if let Ok(b) = s.parse::<usize>() {
            let sched = BatchSchedule::Constant(b);
            sched.validate()?;
            return Ok(sched);
        }
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = s[..open].trim().to_ascii_lowercase();
        let args: Vec<&str> = s[open + 1..s.len() - 1].split(',').map(str::trim).collect();
        let num = |i: usize| -> Result<f64> {
            args.get(i)
                .and_then(|a| a.parse::<f64>().ok())
                .ok_or_else(bad)
        };
        let sched = match (name.as_str(), args.len()) {
            ("constant", 1) => BatchSchedule::Constant(args[0].parse().map_err(|_| bad())?),
            ("linear", 1) => BatchSchedule::Linear { c: num(0)? },
            ("power", 2) => BatchSchedule::PowerLaw {
                c: num(0)?,
                theta: num(1)?,
            },
            _ => return Err(bad()),
        };
        sched.validate()?;
        Ok(sched)
    }
}

/// Step-size schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepSchedule {
    #[default]
    Constant,
    /// `eta_k = eta / (1 + k)`
    InverseTime,
}

impl StepSchedule {
    pub fn eta_at(self, eta: f64, k: usize) -> f64 {
        match self {
            StepSchedule::Constant => eta,
            StepSchedule::InverseTime => eta / (1.0 + k as f64),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StepSchedule::Constant => "constant",
            StepSchedule::InverseTime => "inverse_time",
        }
    }
}

impl FromStr for StepSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "constant" => Ok(StepSchedule::Constant),
            "inverse_time" => Ok(StepSchedule::InverseTime),
            other => Err(Error::config(format!(
                "unknown step schedule `{other}` (expected constant or inverse_time)"
            ))),
        }
    }
}

pub const DEFAULT_ETA: f64 = 0.01;
pub const DEFAULT_DELTA: f64 = 1.0;
pub const DEFAULT_SIGMA2: f64 = 1.0;

/// Complete description of one optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub eta: f64,
    pub eta_schedule: StepSchedule,
    pub alpha: f64,
    pub beta: NoiseExponent,
    pub delta: f64,
    /// Variance of each coordinate of the injected noise `e_k`.
    pub sigma2: f64,
    /// SGLD inverse temperature `u`; the noise scale is `sqrt(2 eta / u)`.
    pub temperature_u: f64,
    pub batch: BatchSchedule,
}

impl MethodConfig {
    fn base(method: Method) -> Self {
        Self {
            method,
            eta: DEFAULT_ETA,
            eta_schedule: StepSchedule::Constant,
            alpha: 0.0,
            beta: NoiseExponent::NoNoise,
            delta: DEFAULT_DELTA,
            sigma2: DEFAULT_SIGMA2,
            temperature_u: 1.0,
            batch: BatchSchedule::Constant(1),
        }
    }

    pub fn asgld(eta: f64, alpha: f64, beta: f64) -> Self {
        Self {
            eta,
            alpha,
            beta: NoiseExponent::Finite(beta),
            ..Self::base(Method::Asgld)
        }
    }

    pub fn agld(eta: f64, alpha: f64, beta: f64) -> Self {
        Self {
            eta,
            alpha,
            beta: NoiseExponent::Finite(beta),
            ..Self::base(Method::Agld)
        }
    }

    pub fn asg(eta: f64, alpha: f64) -> Self {
        Self {
            eta,
            alpha,
            ..Self::base(Method::Asg)
        }
    }

    pub fn sgld(eta: f64, temperature_u: f64) -> Self {
        Self {
            eta,
            beta: NoiseExponent::Finite(0.0),
            temperature_u,
            ..Self::base(Method::Sgld)
        }
    }

    pub fn sgd(eta: f64) -> Self {
        Self {
            eta,
            ..Self::base(Method::Sgd)
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Self {
        self.sigma2 = sigma2;
        self
    }

    pub fn with_batch(mut self, batch: BatchSchedule) -> Self {
        self.batch = batch;
        self
    }

    pub fn with_eta_schedule(mut self, schedule: StepSchedule) -> Self {
        self.eta_schedule = schedule;
        self
    }

    /// Normalizes method-implied fields and checks ranges.
    ///
    /// ASG and SGD always run without injected noise; SGLD and SGD use the
    /// identity preconditioner on the gradient term.
    pub fn validated(mut self) -> Result<Self> {
        match self.method {
            Method::Asg => self.beta = NoiseExponent::NoNoise,
            Method::Sgd => {
                self.alpha = 0.0;
                self.beta = NoiseExponent::NoNoise;
            }
            Method::Sgld => {
                self.alpha = 0.0;
                self.beta = NoiseExponent::Finite(0.0);
            }
            Method::Asgld | Method::Agld => {
                if self.beta == NoiseExponent::NoNoise {
                    return Err(Error::config(format!(
                        "{} requires a finite beta",
                        self.method
                    )));
                }
            }
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("eta", self.eta)?;
        positive("delta", self.delta)?;
        positive("temperature_u", self.temperature_u)?;
        if !(0.0..=2.0).contains(&self.alpha) {
            return Err(Error::config(format!(
                "alpha must lie in [0, 2], got {}",
                self.alpha
            )));
        }
        if let NoiseExponent::Finite(b) = self.beta {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Error::config(format!("beta must be >= 0, got {b}")));
            }
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::config(format!(
                "sigma2 must be non-negative, got {}",
                self.sigma2
            )));
        }
        self.batch.validate()?;
        Ok(self)
    }

    /// Whether `(alpha, beta)` lies in the region where the method provably
    /// reaches an approximate stationary point. Out-of-region configs still run.
    pub fn in_region(&self) -> bool {
        let a = self.alpha;
        match (self.method, self.beta) {
            (Method::Asgld, NoiseExponent::Finite(b)) => a > 0.0 && a <= 2.0 && b > a / 2.0,
            (Method::Agld, NoiseExponent::Finite(b)) => (0.0..=2.0).contains(&a) && b > a / 2.0,
            (Method::Asg, _) => a > 0.0 && a <= 2.0,
            _ => false,
        }
    }

    /// Variance actually fed into the noise term: `sigma2` for the adaptive
    /// methods, `sigma2 / u` for SGLD.
    pub fn effective_sigma2(&self) -> f64 {
        match self.method {
            Method::Sgld => self.sigma2 / self.temperature_u,
            Method::Asgld | Method::Agld => self.sigma2,
            Method::Asg | Method::Sgd => 0.0,
        }
    }

    /// Preconditioner exponent on the gradient term (`alpha / 2`).
    pub fn gradient_exponent(&self) -> f64 {
        match self.method {
            Method::Sgld | Method::Sgd => 0.0,
            _ => self.alpha / 2.0,
        }
    }

    /// Preconditioner exponent on the noise term (`beta / 2`), or `None`
    /// when no noise is injected.
    pub fn noise_exponent(&self) -> Option<f64> {
        match self.method {
            Method::Asg | Method::Sgd => None,
            Method::Sgld => Some(0.0),
            _ => self.beta.value().map(|b| b / 2.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_examples() {
        assert_eq!(BatchSchedule::Constant(10).size(0), 10);
        assert_eq!(BatchSchedule::Constant(10).size(12345), 10);
        assert_eq!(BatchSchedule::Linear { c: 1.0 }.size(7), 8);
        assert_eq!(BatchSchedule::PowerLaw { c: 1.0, theta: 0.5 }.size(99), 10);
        assert_eq!(BatchSchedule::Linear { c: 0.01 }.size(0), 1);
    }

    #[test]
    fn batch_parse() {
        assert_eq!("10".parse::<BatchSchedule>().unwrap(), BatchSchedule::Constant(10));
        assert_eq!(
            "power(2, 0.5)".parse::<BatchSchedule>().unwrap(),
            BatchSchedule::PowerLaw { c: 2.0, theta: 0.5 }
        );
        assert_eq!(
            "linear(1)".parse::<BatchSchedule>().unwrap(),
            BatchSchedule::Linear { c: 1.0 }
        );
        assert!("constant(0)".parse::<BatchSchedule>().is_err());
        assert!("linear(-1)".parse::<BatchSchedule>().is_err());
        assert!("cubic(1)".parse::<BatchSchedule>().is_err());
        for s in [
            BatchSchedule::Constant(3),
            BatchSchedule::Linear { c: 0.5 },
            BatchSchedule::PowerLaw { c: 1.5, theta: 0.25 },
        ] {
            assert_eq!(s.to_string().parse::<BatchSchedule>().unwrap(), s);
        }
    }

    #[test]
    fn method_forcing() {
        let asg = MethodConfig {
            beta: NoiseExponent::Finite(1.0),
            ..MethodConfig::asg(0.1, 1.0)
        }
        .validated()
        .unwrap();
        assert_eq!(asg.beta, NoiseExponent::NoNoise);

        let sgld = MethodConfig {
            alpha: 1.0,
            ..MethodConfig::sgld(0.1, 2.0)
        }
        .validated()
        .unwrap();
        assert_eq!(sgld.alpha, 0.0);
        assert_eq!(sgld.noise_exponent(), Some(0.0));
        assert_eq!(sgld.effective_sigma2(), 0.5);

        let bad = MethodConfig {
            beta: NoiseExponent::NoNoise,
            ..MethodConfig::asgld(0.1, 1.0, 1.0)
        };
        assert!(bad.validated().is_err());
        assert!(MethodConfig::asgld(0.1, 2.5, 1.0).validated().is_err());
        assert!(MethodConfig::asgld(0.0, 1.0, 1.0).validated().is_err());
        assert!(MethodConfig::asgld(0.1, 1.0, 1.0)
            .with_sigma2(-1.0)
            .validated()
            .is_err());
    }

    #[test]
    fn convergence_region_flags() {
        assert!(MethodConfig::asgld(0.1, 1.0, 1.0).in_region());
        assert!(!MethodConfig::asgld(0.1, 1.0, 0.3).in_region());
        assert!(!MethodConfig::asgld(0.1, 0.0, 1.0).in_region());
        assert!(MethodConfig::agld(0.1, 0.0, 1.0).in_region());
        assert!(MethodConfig::agld(0.1, 0.0, 0.3).in_region());
        assert!(!MethodConfig::agld(0.1, 2.0, 1.0).in_region());
        assert!(MethodConfig::asg(0.1, 1.0).in_region());
        assert!(!MethodConfig::asg(0.1, 0.0).in_region());
        assert!(!MethodConfig::sgld(0.1, 1.0).in_region());
        assert!(!MethodConfig::sgd(0.1).in_region());
    }

    #[test]
    fn inverse_time_schedule() {
        assert_eq!(StepSchedule::InverseTime.eta_at(1.0, 0), 1.0);
        assert_eq!(StepSchedule::InverseTime.eta_at(1.0, 3), 0.25);
        assert_eq!(StepSchedule::Constant.eta_at(0.5, 3), 0.5);
    }
}
