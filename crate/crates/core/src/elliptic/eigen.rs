//! Positive principal eigenpair of `−Δ_h φ = λ m φ` for indefinite `m`.
//!
//! `μ₁(λ)`, the smallest eigenvalue of `B(λ) = −Δ_h − λ·diag(m)`, is concave
//! in `λ` with `μ₁(0) > 0`; the principal eigenvalue is its positive root.
//! `B(λ)` is a Z-matrix, so for any positive `x` the Collatz–Wielandt ratios
//! `(Bx)ᵢ/xᵢ` bracket `μ₁`. Shifted inverse iteration with the shift just
//! below the lower ratio keeps `B − σI` a nonsingular M-matrix and the
//! iterate positive.

use super::banded::Factorization;
use super::operator::DiscreteOperator;
use crate::error::{Error, Result};
use crate::field::FieldFunction;
use crate::weights::WeightField;

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Accept `|μ₁| ≤ tol·‖A‖∞` at the root.
    pub tol: f64,
    pub lambda_max: f64,
    pub bisection_steps: usize,
    pub max_inner: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: 1e-8, lambda_max: 1e12, bisection_steps: 60, max_inner: 60 }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda: f64,
    /// Positive on the unknowns, `‖φ‖_∞ = 1`, zero elsewhere.
    pub phi: FieldFunction,
    /// `max |−Δ_h φ − λ m φ|` over the unknowns.
    pub residual: f64,
    /// Number of `μ₁` evaluations.
    pub evaluations: usize,
}

struct Smallest {
    lo: f64,
    hi: f64,
    x: Vec<f64>,
}

impl Smallest {
    fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

fn bounds(op: &DiscreteOperator, lambda: f64, m: &[f64], x: &[f64]) -> (f64, f64) {
    let bx = op.matrix().mul(x);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..x.len() {
        let ratio = (bx[i] - lambda * m[i] * x[i]) / x[i];
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    (lo, hi)
}

fn factor(op: &DiscreteOperator, shift: &[f64]) -> Result<Factorization> {
    if op.is_symmetric() {
        if let Ok(f) = Factorization::new(op.matrix(), Some(shift), true) {
            return Ok(f);
        }
    }
    Factorization::new(op.matrix(), Some(shift), false)
}

/// Smallest eigenvalue of `B(λ)`. Stops early once the sign is certain when
/// `sign_only` is set.
fn smallest(op: &DiscreteOperator, lambda: f64, m: &[f64], mut x: Vec<f64>, opts: &EigenOptions, sign_only: bool) -> Result<Smallest> {
    let scale = op.scale();
    let target = 1e-13 * scale;
    let (mut lo, mut hi) = bounds(op, lambda, m, &x);
    for _ in 0..opts.max_inner {
        if hi - lo <= target || (sign_only && (lo > 0.0 || hi < 0.0)) {
            break;
        }
        let sigma = lo - (hi - lo).max(target);
        let shift: Vec<f64> = m.iter().map(|&mi| -lambda * mi - sigma).collect();
        let f = factor(op, &shift)?;
        f.solve_in_place(&mut x);
        let top = x.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        for v in &mut x {
            *v = (v.abs() / top).max(f64::MIN_POSITIVE);
        }
        let (l, h) = bounds(op, lambda, m, &x);
        // bounds are valid for every positive x; keep the tightest
        lo = l.max(lo);
        hi = h.min(hi);
    }
    Ok(Smallest { lo, hi, x })
}

pub fn principal_eigenpair(op: &DiscreteOperator, m: &WeightField) -> Result<EigenPair> {
    principal_eigenpair_with(op, m, &EigenOptions::default())
}

pub fn principal_eigenpair_with(op: &DiscreteOperator, m: &WeightField, opts: &EigenOptions) -> Result<EigenPair> {
    let mu: Vec<f64> = op.unknowns().iter().map(|&n| m.values()[n]).collect();
    if !mu.iter().any(|&v| v > 0.0) {
        return Err(Error::Eigen("m⁺ vanishes on the unknowns: no positive principal eigenvalue".into()));
    }
    let mut evaluations = 0;
    let mut x = vec![1.0; op.size()];
    let mut eval = |lambda: f64, x0: Vec<f64>, sign_only: bool| {
        evaluations += 1;
        smallest(op, lambda, &mu, x0, opts, sign_only)
    };

    // bracket the root by doubling from λ = 1
    let (mut lo, mut hi) = (0.0, 1.0);
    loop {
        let s = eval(hi, x, true)?;
        x = s.x.clone();
        if s.mid() <= 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > opts.lambda_max {
            return Err(Error::Eigen(format!("no sign change of μ₁ below λ_max = {:e}", opts.lambda_max)));
        }
    }
    for _ in 0..opts.bisection_steps {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let s = eval(mid, x, true)?;
        x = s.x.clone();
        if s.mid() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let s = eval(lambda, x, false)?;
    let tol = opts.tol * op.scale();
    if s.mid().abs() > tol {
        return Err(Error::Eigen(format!("|μ₁(λ₁)| = {:.3e} exceeds tolerance {tol:.3e}", s.mid().abs())));
    }
    let mut phi = vec![0.0; op.n_nodes()];
    for (k, &n) in op.unknowns().iter().enumerate() {
        phi[n] = s.x[k];
    }
    let lphi = op.apply(&phi);
    let residual = op
        .unknowns()
        .iter()
        .enumerate()
        .map(|(k, &n)| (lphi[k] - lambda * mu[k] * phi[n]).abs())
        .fold(0.0, f64::max);
    Ok(EigenPair {
        lambda,
        phi: FieldFunction::from_values(phi),
        residual,
        evaluations,
    })
}
