use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// How `f` is evaluated.
#[derive(Clone)]
pub enum Evaluator {
    /// `f(ξ) = κ ξᵖ`.
    Power { kappa: f64 },
    /// `f(ξ) = ξᵖ + min(ξ, ξᵖ)`, envelope `ξᵖ ≤ f ≤ 2ξᵖ`.
    PowerPlusMin,
    /// Arbitrary nondecreasing `f` (used by tests and validation).
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evaluator::Power { kappa } => write!(f, "Power {{ kappa: {kappa} }}"),
            Evaluator::PowerPlusMin => write!(f, "PowerPlusMin"),
            Evaluator::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Sublinear nonlinearity with envelope `k₁ξᵖ ≤ f(ξ) ≤ k₂ξᵖ`.
#[derive(Clone, Debug)]
pub struct NonlinearityH1 {
    p: f64,
    k1: f64,
    k2: f64,
    evaluator: Evaluator,
}

impl NonlinearityH1 {
    pub fn new(p: f64, k1: f64, k2: f64, evaluator: Evaluator) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidNonlinearity(format!("p must lie in (0,1), got {p}")));
        }
        if !(k1 > 0.0 && k2 > 0.0 && k1 <= k2 && k2.is_finite()) {
            return Err(Error::InvalidNonlinearity(format!(
                "envelope constants must satisfy 0 < k1 <= k2, got k1 = {k1}, k2 = {k2}"
            )));
        }
        if let Evaluator::Power { kappa } = evaluator {
            if !(kappa > 0.0) {
                return Err(Error::InvalidNonlinearity(format!("kappa must be positive, got {kappa}")));
            }
        }
        Ok(NonlinearityH1 { p, k1, k2, evaluator })
    }

    /// `f(ξ) = κξᵖ` with the tight envelope `k₁ = k₂ = κ`.
    pub fn power(p: f64, kappa: f64) -> Result<Self> {
        Self::new(p, kappa, kappa, Evaluator::Power { kappa })
    }

    /// `f(ξ) = ξᵖ + min(ξ, ξᵖ)` with `k₁ = 1`, `k₂ = 2`.
    pub fn power_plus_min(p: f64) -> Result<Self> {
        Self::new(p, 1.0, 2.0, Evaluator::PowerPlusMin)
    }

    pub fn custom(p: f64, k1: f64, k2: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::new(p, k1, k2, Evaluator::Custom(Arc::new(f)))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// `β = 1/(1−p)`.
    pub fn beta(&self) -> f64 {
        1.0 / (1.0 - self.p)
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    /// Same evaluator with a different exponent (envelope constants kept).
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(p, self.k1, self.k2, self.evaluator.clone())
    }

    /// `f(ξ)`; negative arguments are clamped to 0.
    pub fn eval(&self, xi: f64) -> f64 {
        let xi = xi.max(0.0);
        match &self.evaluator {
            Evaluator::Power { kappa } => kappa * xi.powf(self.p),
            Evaluator::PowerPlusMin => {
                let xp = xi.powf(self.p);
                xp + xi.min(xp)
            }
            Evaluator::Custom(f) => f(xi),
        }
    }

    /// Lipschitz bound of `f` on `[a, b]`; infinite when `a = 0` for the
    /// power-type evaluators.
    pub fn lipschitz(&self, a: f64, b: f64) -> f64 {
        let a = a.max(0.0);
        let p = self.p;
        match &self.evaluator {
            // concave: the slope is largest at the left end
            Evaluator::Power { kappa } => {
                if a == 0.0 {
                    f64::INFINITY
                } else {
                    kappa * p * a.powf(p - 1.0)
                }
            }
            Evaluator::PowerPlusMin => {
                if a == 0.0 {
                    f64::INFINITY
                } else {
                    let d = p * a.powf(p - 1.0);
                    d + if a < 1.0 { 1.0 } else { d }
                }
            }
            Evaluator::Custom(f) => {
                let b = b.max(a);
                if b == a {
                    let e = 1e-8 * a.max(1e-12);
                    return 1.5 * ((f(a + e) - f(a)) / e).abs();
                }
                let n = 32;
                let mut worst: f64 = 0.0;
                let mut prev = f(a);
                for k in 1..=n {
                    let x = a + (b - a) * k as f64 / n as f64;
                    let fx = f(x);
                    worst = worst.max((fx - prev).abs() * n as f64 / (b - a));
                    prev = fx;
                }
                1.5 * worst
            }
        }
    }
}

/// Result of the sampled H1 check.
#[derive(Clone, Debug, PartialEq)]
pub struct H1Report {
    pub pass: bool,
    pub samples: usize,
    /// Log-spaced lattice bounds (plus ξ = 0).
    pub lattice: (f64, f64),
    /// `(ξ, description)` of the first violation.
    pub first_violation: Option<(f64, String)>,
    /// First violation of each kind (`zero`, `monotone`, `lower`, `upper`).
    pub violations: Vec<(&'static str, f64)>,
}

/// Samples `f` at `ξ = 0` and on a log-spaced lattice over `[1e-8, 1e8]`,
/// checking `f(0) = 0`, monotonicity and the envelope `k₁ξᵖ ≤ f ≤ k₂ξᵖ`.
pub fn validate_h1(f: &NonlinearityH1, samples: usize) -> Result<H1Report> {
    if samples < 100 {
        return Err(Error::InvalidNonlinearity(format!("sample count {samples} < 100")));
    }
    let (lo, hi) = (1e-8f64, 1e8f64);
    let mut report =
        H1Report { pass: true, samples: samples + 1, lattice: (lo, hi), first_violation: None, violations: vec![] };
    let mut fail = |kind: &'static str, xi: f64, msg: String| {
        if report.pass {
            report.pass = false;
            report.first_violation = Some((xi, msg));
        }
        if !report.violations.iter().any(|(k, _)| *k == kind) {
            report.violations.push((kind, xi));
        }
    };
    let f0 = f.eval(0.0);
    if f0 != 0.0 {
        fail("zero", 0.0, format!("f(0) = {f0} != 0"));
    }
    let mut prev = f0;
    for k in 0..samples {
        let xi = lo * (hi / lo).powf(k as f64 / (samples - 1) as f64);
        let v = f.eval(xi);
        let env = xi.powf(f.p());
        let tol = 1e-12 * env;
        if v < prev - 1e-12 * prev.abs() {
            fail("monotone", xi, format!("f decreases: f({xi:e}) = {v:e} < {prev:e}"));
        }
        if v < f.k1() * env - tol {
            fail("lower", xi, format!("f({xi:e}) = {v:e} below k1·ξ^p = {:e}", f.k1() * env));
        }
        if v > f.k2() * env + tol {
            fail("upper", xi, format!("f({xi:e}) = {v:e} above k2·ξ^p = {:e}", f.k2() * env));
        }
        prev = v;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_examples() {
        let sqrt = NonlinearityH1::power(0.5, 1.0).unwrap();
        assert!(validate_h1(&sqrt, 200).unwrap().pass);
        let mixed = NonlinearityH1::power_plus_min(0.5).unwrap();
        assert!(validate_h1(&mixed, 500).unwrap().pass);
        let linear = NonlinearityH1::custom(0.5, 1.0, 1.0, |x| x).unwrap();
        let r = validate_h1(&linear, 200).unwrap();
        assert!(!r.pass);
        let upper = r.violations.iter().find(|(k, _)| *k == "upper").unwrap();
        assert!(upper.1 > 1.0);
        assert!(validate_h1(&sqrt, 10).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(NonlinearityH1::power(1.5, 1.0).is_err());
        assert!(NonlinearityH1::power(0.0, 1.0).is_err());
        assert!(NonlinearityH1::new(0.5, 2.0, 1.0, Evaluator::PowerPlusMin).is_err());
    }

    #[test]
    fn lipschitz_bounds_secants() {
        for f in [NonlinearityH1::power(0.3, 2.0).unwrap(), NonlinearityH1::power_plus_min(0.6).unwrap()] {
            for &(a, b) in &[(0.01, 0.5), (0.5, 3.0), (2.0, 9.0), (0.9, 1.1)] {
                let l = f.lipschitz(a, b);
                for k in 0..50 {
                    let x = a + (b - a) * k as f64 / 50.0;
                    let y = x + (b - a) / 50.0;
                    assert!((f.eval(y) - f.eval(x)) <= l * (y - x) * (1.0 + 1e-12));
                }
            }
            assert!(f.lipschitz(0.0, 1.0).is_infinite());
        }
    }
}
