//! Glued-subsolution existence pipeline for a weight that is nonnegative on
//! an inner region Ω₀ and arbitrary on the collar Ω₁ = Ω − closure(Ω₀).

use super::{lemma22_bracket, remark23_supersolution, EigenTorsionBracket, SignChangingSuper};
use crate::elliptic::{
    inner_closure, morel_oswald_constant_with, normal_derivative, outer_closure, DiscreteOperator, MorelOswald, Side,
    SubdomainOperators, MAX_GREEN_ROWS,
};
use crate::error::{Error, Result};
use crate::field::FieldFunction;
use crate::geometry::{Grid, NodeClass, SubdomainPartition};
use crate::sublinear::{
    monotone_iterate, positivity_certificate, solve_w_problem, verify_subsolution, BracketPair, IterationOptions,
    IterationReport, PositivityReport, WProblem,
};
use crate::weights::{lr_norm, weighted_delta_integral, NonlinearityH1, WeightField};

#[derive(Clone, Copy, Debug)]
pub struct ExistenceOptions {
    /// `M = [(c₁/c₂)(1 + margin)·k₂‖m⁻‖]^{1/(1−p)}`.
    pub margin: f64,
    pub iteration: IterationOptions,
    pub verify_tol: f64,
    /// Slack of the nodal lower bound on `v`, relative to `max(1, ‖v‖∞)`.
    pub lower_bound_slack: f64,
    pub max_green_rows: usize,
}

impl Default for ExistenceOptions {
    fn default() -> Self {
        ExistenceOptions {
            margin: 0.1,
            iteration: IterationOptions::default(),
            verify_tol: super::VERIFY_TOL,
            lower_bound_slack: 1e-8,
            max_green_rows: MAX_GREEN_ROWS,
        }
    }
}

/// Solve started from the glued subsolution.
#[derive(Clone, Debug)]
pub struct FinalSolve {
    pub sup: SignChangingSuper,
    /// Set when `k` had to be raised so that the super dominates ω.
    pub k_raised: bool,
    pub report: IterationReport,
    pub positivity: PositivityReport,
}

#[derive(Clone, Debug)]
pub struct ExistenceCertificate {
    pub r: f64,
    pub m_minus_norm: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: MorelOswald,
    pub margin: f64,
    pub level: f64,
    pub w_problem: WProblem,
    pub w_positive: bool,
    pub v_bracket: EigenTorsionBracket,
    pub v_report: IterationReport,
    /// `∫_{Ω₀} m δ^{p+1}`.
    pub integral: f64,
    /// `[c₅k₁∫mδ^{p+1}]^{1/(1−p)}`.
    pub v_bound_coefficient: f64,
    /// `min (v − coefficient·δ₀)` over Ω₀, scaled by `max(1, ‖v‖∞)`.
    pub v_bound_slack: f64,
    pub v_bound_holds: bool,
    pub omega: FieldFunction,
    /// In partition interface order.
    pub flux_u: Vec<f64>,
    pub flux_w: Vec<f64>,
    pub max_flux_w: f64,
    pub flux_pass: bool,
    /// Worst scaled defect of ω as a subsolution on Ω; the flux test covers
    /// the interface, this checks the discrete stencil there.
    pub omega_excess: f64,
    pub omega_subsolution: bool,
    /// `c₃^{1−p}c₄k₂‖m⁻‖` and `c₅k₁∫mδ^{p+1}`.
    pub inequality_lhs: f64,
    pub inequality_rhs: f64,
    pub inequality_pass: bool,
    pub final_solve: Option<FinalSolve>,
    /// Why the final solve did not run, if it did not.
    pub final_note: Option<String>,
}

impl ExistenceCertificate {
    /// Flux test passed and the final solution is strictly positive.
    pub fn certified(&self) -> bool {
        self.flux_pass && self.final_solve.as_ref().is_some_and(|s| s.report.converged && s.positivity.pass)
    }
}

/// Runs the construction on `grid` with operator `op` on all interior nodes.
pub fn theorem31_certify(
    grid: &Grid,
    op: &DiscreteOperator,
    m: &WeightField,
    f: &NonlinearityH1,
    partition: &SubdomainPartition,
    opts: &ExistenceOptions,
) -> Result<ExistenceCertificate> {
    let mv = m.values();
    let inner = partition.inner_nodes();
    if let Some(&n) = inner.iter().find(|&&n| mv[n] < 0.0) {
        return Err(Error::Precondition(format!("weight is negative at node {n} of the inner region")));
    }
    if inner.iter().all(|&n| mv[n] == 0.0) {
        return Err(Error::Precondition("weight vanishes identically on the inner region".into()));
    }
    let (p, beta) = (f.p(), f.beta());
    let ops = SubdomainOperators::new(grid, partition)?;
    let minus = m.negative_part();
    let collar = outer_closure(grid, partition);
    let r = m.exponent();
    let m_minus_norm = lr_norm(minus.values(), grid, r, &collar).value;
    if m_minus_norm == 0.0 {
        return Err(Error::Precondition("m⁻ vanishes on the collar; the eigenfunction bracket applies directly".into()));
    }

    // w-problem on the collar
    let w_probe = solve_w_problem(grid, partition, &ops.outer, &minus, f, 1.0, &opts.iteration)?;
    let delta1 = partition.delta_outer();
    let (mut c1, mut c2) = (0.0f64, f64::INFINITY);
    for &n in partition.outer_nodes() {
        c1 = c1.max(w_probe.psi.get(n).abs() / (delta1[n] * m_minus_norm));
        c2 = c2.min(w_probe.theta.get(n) / delta1[n]);
    }
    let ratio = (c1 / c2) * (1.0 + opts.margin);
    let level = (ratio * f.k2() * m_minus_norm).powf(beta);
    let w_problem = solve_w_problem(grid, partition, &ops.outer, &minus, f, level, &opts.iteration)?;
    let w = w_problem.w().values().to_vec();
    let w_positive = partition.outer_nodes().iter().all(|&n| w[n] > 0.0);
    let flux_w = normal_derivative(grid, &w, partition, Side::FromOuter)?;
    let max_flux_w = flux_w.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    // v on the inner region
    let v_bracket = lemma22_bracket(&ops.inner, m, f, opts.verify_tol)?;
    let zeros = vec![0.0; grid.len()];
    let v_report = monotone_iterate(&ops.inner, m, f, &v_bracket.bracket, &zeros, &opts.iteration)?;
    if !v_report.converged {
        return Err(Error::NotConverged(format!("inner problem after {} sweeps", v_report.iterations)));
    }
    let v = v_report.solution.values();
    let delta0 = partition.delta_inner();
    let c5 = morel_oswald_constant_with(&ops.inner, delta0, opts.max_green_rows)?;
    let integral = weighted_delta_integral(mv, delta0, grid, p + 1.0, inner);
    let v_bound_coefficient = (c5.c * f.k1() * integral).powf(beta);
    let v_scale = inner.iter().fold(1.0f64, |a, &n| a.max(v[n].abs()));
    let v_bound_slack = inner
        .iter()
        .map(|&n| (v[n] - v_bound_coefficient * delta0[n]) / v_scale)
        .fold(f64::INFINITY, f64::min);
    let v_bound_holds = v_bound_slack >= -opts.lower_bound_slack;

    // glue
    let mut u = vec![0.0; grid.len()];
    let mut omega = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        match partition.class(i) {
            NodeClass::Inner | NodeClass::Interface => {
                u[i] = level + v[i];
                omega[i] = u[i];
            }
            _ => omega[i] = w[i],
        }
    }
    let flux_u = normal_derivative(grid, &u, partition, Side::FromInner)?;
    let flux_pass = flux_u.iter().zip(&flux_w).all(|(a, b)| a <= b);
    let omega_excess = match verify_subsolution(op, &omega, &zeros, m, f, f64::INFINITY) {
        Ok(e) => e,
        Err(_) => f64::INFINITY,
    };
    let omega_subsolution = omega_excess <= opts.verify_tol;

    // the proof's closing inequality with measured constants
    let c4 = ratio.max(1.0);
    let c3 = max_flux_w / (c4 * f.k2() * m_minus_norm).powf(beta);
    let inequality_lhs = c3.powf(1.0 - p) * c4 * f.k2() * m_minus_norm;
    let inequality_rhs = c5.c * f.k1() * integral;
    let inequality_pass = inequality_lhs <= inequality_rhs;

    let omega = FieldFunction::from_values(omega);
    let (final_solve, final_note) = if !flux_pass {
        (None, Some("flux condition fails".to_string()))
    } else if !omega_subsolution {
        (None, Some(format!("glued field is not a discrete subsolution (excess {omega_excess:.3e})")))
    } else {
        let base = remark23_supersolution(op, m, f, opts.verify_tol)?;
        let need = (0..grid.len())
            .filter(|&i| base.sup.get(i) > 0.0)
            .map(|i| omega.get(i) / base.sup.get(i))
            .fold(1.0f64, f64::max);
        let (sup, k_raised) = if need > 1.0 { (base.rescaled(base.k * need * (1.0 + 1e-12)), true) } else { (base, false) };
        if (0..grid.len()).any(|i| omega.get(i) > sup.sup.get(i)) {
            return Err(Error::Bracket { node: 0, msg: "glued subsolution exceeds the rescaled supersolution".into() });
        }
        let bracket = BracketPair::new(omega.clone(), sup.sup.clone());
        let report = monotone_iterate(op, m, f, &bracket, &zeros, &opts.iteration)?;
        let positivity = positivity_certificate(report.solution.values(), grid.delta(), grid.interior());
        (Some(FinalSolve { sup, k_raised, report, positivity }), None)
    };

    let support = inner_closure(grid, partition);
    let v_field = v_report.solution.clone().with_support(support);
    let v_report = IterationReport { solution: v_field, ..v_report };
    Ok(ExistenceCertificate {
        r,
        m_minus_norm,
        c1,
        c2,
        c3,
        c4,
        c5,
        margin: opts.margin,
        level,
        w_problem,
        w_positive,
        v_bracket,
        v_report,
        integral,
        v_bound_coefficient,
        v_bound_slack,
        v_bound_holds,
        omega,
        flux_u,
        flux_w,
        max_flux_w,
        flux_pass,
        omega_excess,
        omega_subsolution,
        inequality_lhs,
        inequality_rhs,
        inequality_pass,
        final_solve,
        final_note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, SubRegion};
    use crate::weights::{PieceRegion, Sampling, WeightPiece, Expr};

    fn scenario(res: usize, mu: f64) -> (Grid, DiscreteOperator, WeightField, NonlinearityH1, SubdomainPartition) {
        let g = Grid::new(Domain::unit_interval(), res).unwrap();
        let pieces = vec![
            WeightPiece { region: PieceRegion::parse("[0.3,0.7]").unwrap(), expr: Expr::parse("1").unwrap() },
            WeightPiece { region: PieceRegion::All, expr: Expr::parse(&format!("-{mu}")).unwrap() },
        ];
        let m = WeightField::from_pieces(&g, &pieces, Sampling::Nodal, f64::INFINITY).unwrap();
        let part = SubdomainPartition::new(&g, SubRegion::Interval { a: 0.3, b: 0.7 }).unwrap();
        let op = DiscreteOperator::new(&g).unwrap();
        (g, op, m, NonlinearityH1::power(0.5, 1.0).unwrap(), part)
    }

    #[test]
    fn mild_absorption_is_certified() {
        let (g, op, m, f, part) = scenario(128, 0.01);
        let c = theorem31_certify(&g, &op, &m, &f, &part, &ExistenceOptions::default()).unwrap();
        assert!(c.flux_pass, "flux u {:?} w {:?}", c.flux_u, c.flux_w);
        assert!(c.certified());
        assert!(c.v_bound_holds && c.w_positive);
        assert!(c.final_solve.unwrap().positivity.min_ratio > 0.0);
    }

    #[test]
    fn strong_absorption_fails_flux() {
        let (g, op, m, f, part) = scenario(128, 1e4);
        let c = theorem31_certify(&g, &op, &m, &f, &part, &ExistenceOptions::default()).unwrap();
        assert!(!c.flux_pass && !c.certified());
        assert!(c.max_flux_w.is_finite() && c.v_bound_holds);
    }

    #[test]
    fn negative_inner_weight_is_rejected() {
        let g = Grid::new(Domain::unit_interval(), 64).unwrap();
        let op = DiscreteOperator::new(&g).unwrap();
        let m = WeightField::from_fn(&g, |p| p[0] - 0.5);
        let part = SubdomainPartition::new(&g, SubRegion::Interval { a: 0.3, b: 0.7 }).unwrap();
        let f = NonlinearityH1::power(0.5, 1.0).unwrap();
        assert!(matches!(
            theorem31_certify(&g, &op, &m, &f, &part, &ExistenceOptions::default()),
            Err(Error::Precondition(_))
        ));
    }
}
