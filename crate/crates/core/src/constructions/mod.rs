//! Constructive versions of the existence and nonexistence arguments: the
//! eigenfunction/torsion bracket, the glued-subsolution existence pipeline,
//! the barrier nonexistence certificate and the integral criterion on a
//! convex absorption region.

mod existence;
mod nonexistence;

pub use existence::{theorem31_certify, ExistenceCertificate, ExistenceOptions, FinalSolve};
pub use nonexistence::{
    barrier_field, barrier_laplacian, barrier_value, barrier_verify, corollary33_certify, theorem32_certify,
    BarrierReport, IntegralCriterionReport, NonexistenceCertificate, Verdict, GRID_DIRECTION_NOTE,
};

use crate::elliptic::{principal_eigenpair, DiscreteOperator, EigenPair};
use crate::error::{Error, Result};
use crate::field::FieldFunction;
use crate::sublinear::{verify_subsolution, verify_supersolution, BracketPair};
use crate::weights::{NonlinearityH1, WeightField};

/// Default slack for discrete sub/supersolution checks.
pub const VERIFY_TOL: f64 = 1e-8;

/// `(1−p)² / (2(N(1−p) + 2p))`.
pub fn cnp(n: usize, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("dimension must be at least 1".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidNonlinearity(format!("p must lie in (0,1), got {p}")));
    }
    let q = 1.0 - p;
    Ok(q * q / (2.0 * (n as f64 * q + 2.0 * p)))
}

/// `εφ_e ≤ u ≤ k(φ_L + 1)` for a nonnegative weight.
#[derive(Clone, Debug)]
pub struct EigenTorsionBracket {
    pub bracket: BracketPair,
    pub epsilon: f64,
    pub k: f64,
    pub eigen: EigenPair,
    /// `−Δ_h φ_L = m` with zero data.
    pub phi_l: FieldFunction,
    pub phi_l_norm: f64,
    /// Scaled worst defects of the two checks (nonpositive when exact).
    pub sub_excess: f64,
    pub super_excess: f64,
}

/// `k = [k₂(1 + ‖φ‖∞)ᵖ]^{1/(1−p)}`.
fn super_level(f: &NonlinearityH1, phi_norm: f64) -> f64 {
    (f.k2() * (1.0 + phi_norm).powf(f.p())).powf(f.beta())
}

fn max_on(op: &DiscreteOperator, v: &[f64]) -> f64 {
    op.unknowns().iter().map(|&n| v[n].abs()).fold(0.0, f64::max)
}

/// Bracket for `m ≥ 0` on the unknowns of `op` with zero data.
pub fn lemma22_bracket(op: &DiscreteOperator, m: &WeightField, f: &NonlinearityH1, tol: f64) -> Result<EigenTorsionBracket> {
    let mv = m.values();
    if let Some(&n) = op.unknowns().iter().find(|&&n| mv[n] < 0.0) {
        return Err(Error::Precondition(format!("weight is negative at node {n}")));
    }
    if op.unknowns().iter().all(|&n| mv[n] == 0.0) {
        return Err(Error::Precondition("weight vanishes identically".into()));
    }
    let zeros = vec![0.0; op.n_nodes()];
    let eigen = principal_eigenpair(op, m)?;
    let phi_l = op.solve(mv, &zeros)?;
    let (p, beta) = (f.p(), f.beta());
    let phi_e_norm = eigen.phi.sup_norm();
    let epsilon = (f.k1() / (eigen.lambda * phi_e_norm.powf(1.0 - p))).powf(beta);
    let phi_l_norm = max_on(op, &phi_l);
    let k = super_level(f, phi_l_norm);
    let sub = eigen.phi.map(|v| epsilon * v);
    let sup: Vec<f64> = phi_l.iter().map(|&v| k * (v + 1.0)).collect();
    let sub_excess = verify_subsolution(op, sub.values(), &zeros, m, f, tol)?;
    let super_excess = verify_supersolution(op, &sup, &zeros, m, f, tol)?;
    Ok(EigenTorsionBracket {
        bracket: BracketPair::new(sub, FieldFunction::from_values(sup)),
        epsilon,
        k,
        eigen,
        phi_l: FieldFunction::from_values(phi_l),
        phi_l_norm,
        sub_excess,
        super_excess,
    })
}

/// `k(φ + 1)` with `−Δ_h φ = m⁺`, a supersolution for sign-changing `m`.
#[derive(Clone, Debug)]
pub struct SignChangingSuper {
    pub sup: FieldFunction,
    pub k: f64,
    pub phi: FieldFunction,
    pub phi_norm: f64,
    pub excess: f64,
}

impl SignChangingSuper {
    /// The same construction with `k` raised to `k_new ≥ k`; still a
    /// supersolution since `k^{1−p}` only grows.
    pub fn rescaled(&self, k_new: f64) -> Self {
        let k = k_new.max(self.k);
        SignChangingSuper { sup: self.phi.map(|v| k * (v + 1.0)), k, ..self.clone() }
    }
}

pub fn remark23_supersolution(op: &DiscreteOperator, m: &WeightField, f: &NonlinearityH1, tol: f64) -> Result<SignChangingSuper> {
    let plus = m.positive_part();
    if op.unknowns().iter().all(|&n| plus.values()[n] == 0.0) {
        return Err(Error::Precondition("m⁺ vanishes identically".into()));
    }
    let zeros = vec![0.0; op.n_nodes()];
    let phi = op.solve(plus.values(), &zeros)?;
    let phi_norm = max_on(op, &phi);
    let k = super_level(f, phi_norm);
    let sup: Vec<f64> = phi.iter().map(|&v| k * (v + 1.0)).collect();
    let excess = verify_supersolution(op, &sup, &zeros, m, f, tol)?;
    Ok(SignChangingSuper { sup: FieldFunction::from_values(sup), k, phi: FieldFunction::from_values(phi), phi_norm, excess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, Grid};
    use std::f64::consts::PI;

    #[test]
    fn cnp_values() {
        assert!((cnp(1, 0.5).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!((cnp(2, 0.5).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        let seq: Vec<f64> = [0.9, 0.99, 0.999].iter().map(|&p| cnp(1, p).unwrap()).collect();
        assert!(seq[0] > seq[1] && seq[1] > seq[2] && seq[2] < 1e-6);
        assert!(cnp(1, 0.5).unwrap() > cnp(2, 0.5).unwrap());
        assert!(cnp(1, 1.0).is_err() && cnp(0, 0.5).is_err());
    }

    #[test]
    fn bracket_constants_on_interval() {
        let g = Grid::new(Domain::unit_interval(), 256).unwrap();
        let op = DiscreteOperator::new(&g).unwrap();
        let f = NonlinearityH1::power(0.5, 1.0).unwrap();
        let m = WeightField::from_fn(&g, |_| 1.0);
        let b = lemma22_bracket(&op, &m, &f, VERIFY_TOL).unwrap();
        assert!((b.epsilon / PI.powi(-4) - 1.0).abs() < 2e-3);
        assert!((b.k / 1.125 - 1.0).abs() < 2e-3);
        let (s, t) = (b.bracket.sub.values(), b.bracket.sup.values());
        assert!(s.iter().zip(t).all(|(a, b)| a <= b));
        let b4 = lemma22_bracket(&op, &m.scaled(4.0), &f, VERIFY_TOL).unwrap();
        assert!((b4.epsilon / b.epsilon - 16.0).abs() < 1e-6);
        assert!(lemma22_bracket(&op, &WeightField::from_fn(&g, |p| p[0] - 0.5), &f, VERIFY_TOL).is_err());
    }

    #[test]
    fn sign_changing_super() {
        let g = Grid::new(Domain::unit_interval(), 128).unwrap();
        let op = DiscreteOperator::new(&g).unwrap();
        let f = NonlinearityH1::power(0.5, 1.0).unwrap();
        let m = WeightField::from_fn(&g, |p| p[0] - 0.5);
        let s = remark23_supersolution(&op, &m, &f, VERIFY_TOL).unwrap();
        assert!(s.sup.values().iter().all(|&v| v > 0.0));
        let same = lemma22_bracket(&op, &m.positive_part(), &f, VERIFY_TOL).unwrap();
        assert_eq!(same.bracket.sup.values(), s.sup.values());
        assert!(remark23_supersolution(&op, &WeightField::from_fn(&g, |_| -1.0), &f, VERIFY_TOL).is_err());
    }
}
