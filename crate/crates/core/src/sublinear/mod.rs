//! The semilinear problem `−Δu = m f(u)`: shifted monotone iteration between
//! an ordered sub/supersolution pair, the mixed problem for `w` on Ω₁,
//! residuals and the strict-positivity proxy.

use crate::elliptic::{mixed_data, mixed_solve, outer_closure, DiscreteOperator};
use crate::error::{Error, Result};
use crate::field::FieldFunction;
use crate::geometry::{Grid, SubdomainPartition};
use crate::weights::{NonlinearityH1, WeightField};

#[derive(Clone, Copy, Debug)]
pub struct IterationOptions {
    pub max_sweeps: usize,
    /// Sup-norm change, relative to `max(1, ‖u‖∞)`.
    pub change_tol: f64,
    /// Residual, relative to `max(1, ‖u‖∞, ‖m f(u)‖∞)`.
    pub residual_tol: f64,
    /// Cap on the nodal shift.
    pub shift_max: f64,
    /// Slack for the bracket checks, same scaling as the residual.
    pub bracket_tol: f64,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions { max_sweeps: 500, change_tol: 1e-10, residual_tol: 1e-8, shift_max: 1e30, bracket_tol: 1e-10 }
    }
}

/// Ordered pair of full nodal fields.
#[derive(Clone, Debug)]
pub struct BracketPair {
    pub sub: FieldFunction,
    pub sup: FieldFunction,
}

/// Signed defect `−Δ_h u − m f(u)` at each unknown, in unknown order.
pub fn defect(op: &DiscreteOperator, u: &[f64], m: &WeightField, f: &NonlinearityH1) -> Vec<f64> {
    let lap = op.apply(u);
    op.unknowns()
        .iter()
        .zip(lap)
        .map(|(&n, a)| a - m.values()[n] * f.eval(u[n]))
        .collect()
}

/// `max |−Δ_h u − m f(u)|` over the unknowns.
pub fn residual(op: &DiscreteOperator, u: &[f64], m: &WeightField, f: &NonlinearityH1) -> f64 {
    defect(op, u, m, f).iter().fold(0.0, |a, &d| a.max(d.abs()))
}

fn field_scale(op: &DiscreteOperator, u: &[f64], m: &WeightField, f: &NonlinearityH1) -> f64 {
    op.unknowns()
        .iter()
        .map(|&n| u[n].abs().max((m.values()[n] * f.eval(u[n])).abs()))
        .fold(1.0, f64::max)
}

/// Worst violation of a sub- (`sign = 1`) or super- (`sign = −1`) solution
/// inequality, as `(node, excess)` with the excess already scaled.
fn worst_violation(op: &DiscreteOperator, u: &[f64], data: &[f64], m: &WeightField, f: &NonlinearityH1, sign: f64) -> (usize, f64) {
    let scale = field_scale(op, u, m, f);
    let mut worst = (usize::MAX, f64::NEG_INFINITY);
    for (k, d) in defect(op, u, m, f).into_iter().enumerate() {
        let e = sign * d / scale;
        if e > worst.1 {
            worst = (op.unknowns()[k], e);
        }
    }
    for (n, (&un, &dn)) in u.iter().zip(data).enumerate() {
        if op.index_of(n).is_none() {
            let e = sign * (un - dn) / un.abs().max(dn.abs()).max(1.0);
            if e > worst.1 {
                worst = (n, e);
            }
        }
    }
    worst
}

/// Checks `u` is a discrete subsolution: `−Δ_h u ≤ m f(u)` at the unknowns
/// and `u ≤ data` elsewhere, with scaled slack `tol`.
pub fn verify_subsolution(op: &DiscreteOperator, u: &[f64], data: &[f64], m: &WeightField, f: &NonlinearityH1, tol: f64) -> Result<f64> {
    let (node, e) = worst_violation(op, u, data, m, f, 1.0);
    if e > tol {
        return Err(Error::Verification { node, msg: "not a subsolution".into(), excess: e });
    }
    Ok(e)
}

/// Checks `u` is a discrete supersolution, mirror of [`verify_subsolution`].
pub fn verify_supersolution(op: &DiscreteOperator, u: &[f64], data: &[f64], m: &WeightField, f: &NonlinearityH1, tol: f64) -> Result<f64> {
    let (node, e) = worst_violation(op, u, data, m, f, -1.0);
    if e > tol {
        return Err(Error::Verification { node, msg: "not a supersolution".into(), excess: e });
    }
    Ok(e)
}

impl BracketPair {
    pub fn new(sub: FieldFunction, sup: FieldFunction) -> Self {
        BracketPair { sub, sup }
    }

    /// Order, subsolution and supersolution checks.
    pub fn check(&self, op: &DiscreteOperator, data: &[f64], m: &WeightField, f: &NonlinearityH1, tol: f64) -> Result<()> {
        let (s, t) = (self.sub.values(), self.sup.values());
        if s.len() != op.n_nodes() || t.len() != op.n_nodes() {
            return Err(Error::Precondition("bracket fields do not match the grid".into()));
        }
        for n in 0..s.len() {
            if s[n] - t[n] > tol * s[n].abs().max(1.0) {
                return Err(Error::Bracket { node: n, msg: format!("sub {:.6e} exceeds super {:.6e}", s[n], t[n]) });
            }
        }
        let bracket = |e: Error| match e {
            Error::Verification { node, msg, excess } => Error::Bracket { node, msg: format!("{msg} (excess {excess:.3e})") },
            other => other,
        };
        verify_subsolution(op, s, data, m, f, tol).map_err(bracket)?;
        verify_supersolution(op, t, data, m, f, tol).map_err(bracket)?;
        Ok(())
    }
}

/// One sweep of the paired iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepLog {
    /// Signed extremes of `lower_{k+1} − lower_k`.
    pub min_change: f64,
    pub max_change: f64,
    /// Largest decrease of the lower or increase of the upper iterate
    /// before projection; zero for an exactly monotone sweep.
    pub monotonicity_violation: f64,
    /// Largest excursion of either iterate outside the initial bracket.
    pub sandwich_violation: f64,
    /// `max(upper − lower)`.
    pub gap: f64,
    /// Unknowns whose shift hit the cap.
    pub capped: usize,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct IterationReport {
    /// Limit of the sequence started from the subsolution.
    pub solution: FieldFunction,
    /// Last iterate of the sequence started from the supersolution.
    pub upper: FieldFunction,
    pub iterations: usize,
    pub residual: f64,
    pub log: Vec<SweepLog>,
    pub converged: bool,
}

impl IterationReport {
    pub fn max_monotonicity_violation(&self) -> f64 {
        self.log.iter().fold(0.0, |a, s| a.max(s.monotonicity_violation))
    }

    pub fn max_sandwich_violation(&self) -> f64 {
        self.log.iter().fold(0.0, |a, s| a.max(s.sandwich_violation))
    }
}

/// Runs `(−Δ_h + Λ)u_{k+1} = m f(u_k) + Λu_k` from both ends of the bracket
/// on the unknowns of `op`, with `u = data` elsewhere.
///
/// The shift is `Λ = m⁻·L`, with `L` the Lipschitz bound of `f` on
/// `[lower_k, upper_k]`, recomputed every sweep and capped at
/// `opts.shift_max`. Both sequences share one factorization per sweep. Each
/// new iterate is projected onto `[previous, initial super]` (lower) or
/// `[initial sub, previous]` (upper); the raw excursions are logged.
pub fn monotone_iterate(
    op: &DiscreteOperator,
    m: &WeightField,
    f: &NonlinearityH1,
    bracket: &BracketPair,
    data: &[f64],
    opts: &IterationOptions,
) -> Result<IterationReport> {
    bracket.check(op, data, m, f, opts.bracket_tol)?;
    let unknowns = op.unknowns();
    let (sub0, sup0) = (bracket.sub.values(), bracket.sup.values());
    let mut lower = data.to_vec();
    let mut upper = data.to_vec();
    for &n in unknowns {
        lower[n] = sub0[n];
        upper[n] = sup0[n];
    }
    let mv = m.values();
    let mut log = Vec::new();
    let mut converged = false;
    let mut res = residual(op, &lower, m, f);
    let mut rhs = vec![0.0; lower.len()];
    for _ in 0..opts.max_sweeps {
        let mut capped = 0;
        let shift: Vec<f64> = unknowns
            .iter()
            .map(|&n| {
                let neg = (-mv[n]).max(0.0);
                if neg == 0.0 {
                    return 0.0;
                }
                let s = neg * f.lipschitz(lower[n], upper[n]);
                if s.is_finite() && s <= opts.shift_max {
                    s
                } else {
                    capped += 1;
                    opts.shift_max
                }
            })
            .collect();
        let factor = op.factor_shifted(&shift)?;
        let mut step = |u: &[f64]| {
            for (k, &n) in unknowns.iter().enumerate() {
                rhs[n] = mv[n] * f.eval(u[n]) + shift[k] * u[n];
            }
            op.solve_with(&factor, Some(&shift), &rhs, data)
        };
        let mut new_lower = step(&lower)?;
        let mut new_upper = step(&upper)?;

        let (mut violation, mut sandwich) = (0.0f64, 0.0f64);
        let (mut min_change, mut max_change, mut change, mut gap) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64);
        for &n in unknowns {
            violation = violation.max(lower[n] - new_lower[n]).max(new_upper[n] - upper[n]);
            sandwich = sandwich
                .max(sub0[n] - new_lower[n])
                .max(new_lower[n] - sup0[n])
                .max(sub0[n] - new_upper[n])
                .max(new_upper[n] - sup0[n]);
            new_lower[n] = new_lower[n].max(lower[n]).min(sup0[n]);
            new_upper[n] = new_upper[n].min(upper[n]).max(new_lower[n]);
            let d = new_lower[n] - lower[n];
            min_change = min_change.min(d);
            max_change = max_change.max(d);
            change = change.max(d.abs());
            gap = gap.max(new_upper[n] - new_lower[n]);
        }
        lower = new_lower;
        upper = new_upper;
        res = residual(op, &lower, m, f);
        log.push(SweepLog {
            min_change,
            max_change,
            monotonicity_violation: violation.max(0.0),
            sandwich_violation: sandwich.max(0.0),
            gap,
            capped,
            residual: res,
        });
        let size = unknowns.iter().fold(1.0f64, |a, &n| a.max(lower[n].abs()));
        if change <= opts.change_tol * size && res <= opts.residual_tol * field_scale(op, &lower, m, f) {
            converged = true;
            break;
        }
    }
    Ok(IterationReport {
        solution: FieldFunction::from_values(lower),
        upper: FieldFunction::from_values(upper),
        iterations: log.len(),
        residual: res,
        log,
        converged,
    })
}

/// Solution of the mixed problem together with its linear ingredients.
#[derive(Clone, Debug)]
pub struct WProblem {
    /// `−Δθ = 0` on Ω₁, `θ = 0` on ∂Ω, `θ = 1` on ∂Ω₀.
    pub theta: FieldFunction,
    /// `−Δψ = m⁻` on Ω₁ with zero data.
    pub psi: FieldFunction,
    pub bracket: BracketPair,
    pub report: IterationReport,
}

impl WProblem {
    pub fn w(&self) -> &FieldFunction {
        &self.report.solution
    }
}

/// Solves `−Δw = −m⁻ f(w)` on Ω₁ with `w = 0` on ∂Ω and `w = level` on ∂Ω₀,
/// between `max(0, level·θ − k₂·levelᵖ·ψ)` and the constant `level`.
pub fn solve_w_problem(
    grid: &Grid,
    partition: &SubdomainPartition,
    op_outer: &DiscreteOperator,
    m_minus: &WeightField,
    f: &NonlinearityH1,
    level: f64,
    opts: &IterationOptions,
) -> Result<WProblem> {
    if !(level > 0.0 && level.is_finite()) {
        return Err(Error::Precondition(format!("interface level must be positive, got {level}")));
    }
    if m_minus.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Precondition("m⁻ must be nonnegative".into()));
    }
    let n = grid.len();
    let theta = mixed_solve(grid, partition, op_outer, &FieldFunction::zeros(n), 0.0, 1.0)?;
    let psi = mixed_solve(grid, partition, op_outer, &m_minus.as_field(), 0.0, 0.0)?;
    let data = mixed_data(grid, partition, 0.0, level);
    let lift = f.k2() * level.powf(f.p());
    let mut sub = data.clone();
    let mut sup = data.clone();
    for &node in op_outer.unknowns() {
        sub[node] = (level * theta.get(node) - lift * psi.get(node)).max(0.0);
        sup[node] = level;
    }
    let bracket = BracketPair::new(FieldFunction::from_values(sub), FieldFunction::from_values(sup));
    let weight = m_minus.scaled(-1.0);
    let mut report = monotone_iterate(op_outer, &weight, f, &bracket, &data, opts)?;
    if !report.converged {
        return Err(Error::NotConverged(format!(
            "w-problem after {} sweeps (residual {:.3e})",
            report.iterations, report.residual
        )));
    }
    let support = outer_closure(grid, partition);
    report.solution = report.solution.with_support(support.clone());
    report.upper = report.upper.with_support(support);
    Ok(WProblem { theta, psi, bracket, report })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositivityReport {
    pub min_u: f64,
    pub min_ratio: f64,
    /// Node attaining `min_ratio`.
    pub argmin: usize,
    pub pass: bool,
}

/// Strict-positivity proxy over `nodes`: `min u > 0` and `min u/δ > 0`.
pub fn positivity_certificate(u: &[f64], delta: &[f64], nodes: &[usize]) -> PositivityReport {
    let mut out = PositivityReport { min_u: f64::INFINITY, min_ratio: f64::INFINITY, argmin: usize::MAX, pass: false };
    for &n in nodes {
        out.min_u = out.min_u.min(u[n]);
        if delta[n] > 0.0 {
            let r = u[n] / delta[n];
            if r < out.min_ratio {
                out.min_ratio = r;
                out.argmin = n;
            }
        }
    }
    out.pass = !nodes.is_empty() && out.min_u > 0.0 && out.min_ratio > 0.0;
    out
}
