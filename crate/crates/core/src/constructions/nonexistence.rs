//! Nonexistence certificates: the barrier ball criterion and the integral
//! criterion on a convex absorption region.

use std::fmt;

use super::cnp;
use crate::elliptic::{green_operator_norm_with, DiscreteOperator, GreenNorm};
use crate::error::{Error, Result};
use crate::field::FieldFunction;
use crate::geometry::{enumerate_nonpositive_balls, Ball, Grid, ScoredBall, SubRegion};
use crate::weights::{check_convex_nonpositive, lr_norm, region_nodes, ConvexityReport, NonlinearityH1, WeightField};

/// Grid balls are a subset of all balls, so the grid left-hand side never
/// exceeds the continuum one: a grid-certified nonexistence is valid
/// evidence, a grid "no information" is inconclusive.
pub const GRID_DIRECTION_NOTE: &str =
    "certified at grid scale; grid balls under-estimate the continuum supremum, so only a positive verdict transfers";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    NonexistenceCertified,
    NoInformation,
    /// `m⁺ ≡ 0`: no positive solution by the maximum principle.
    TrivialObstruction,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::NonexistenceCertified => "nonexistence certified",
            Verdict::NoInformation => "no information",
            Verdict::TrivialObstruction => "trivial obstruction",
        })
    }
}

/// `[k₁·C·m_R·ρ²]^{1/(1−p)}` at distance `ρ` from the center.
pub fn barrier_value(rho: f64, m_r: f64, f: &NonlinearityH1, dim: usize) -> Result<f64> {
    Ok((f.k1() * cnp(dim, f.p())? * m_r * rho * rho).powf(f.beta()))
}

/// Closed-form Laplacian of the barrier, `a·2β(2β−2+N)·ρ^{2β−2}` with
/// `a = (k₁Cm_R)^β`; evaluated without using the identity that makes it
/// equal `k₁m_R wᵖ`.
pub fn barrier_laplacian(rho: f64, m_r: f64, f: &NonlinearityH1, dim: usize) -> Result<f64> {
    let beta = f.beta();
    let a = (f.k1() * cnp(dim, f.p())? * m_r).powf(beta);
    let e = 2.0 * beta - 2.0;
    let radial = if e == 0.0 { 1.0 } else { rho.powf(e) };
    Ok(a * 2.0 * beta * (2.0 * beta - 2.0 + dim as f64) * radial)
}

fn rho(grid: &Grid, node: usize, center: [f64; 2]) -> f64 {
    let p = grid.coord(node);
    (p[0] - center[0]).hypot(p[1] - center[1])
}

/// Barrier nodal values on the closed ball, supported there.
pub fn barrier_field(grid: &Grid, ball: &Ball, m_r: f64, f: &NonlinearityH1) -> Result<FieldFunction> {
    if !(m_r > 0.0 && ball.radius > 0.0) {
        return Err(Error::Precondition("barrier needs m_R > 0 and R > 0".into()));
    }
    let mut values = vec![0.0; grid.len()];
    let mut support = Vec::new();
    for node in 0..grid.len() {
        if ball.contains_closed(grid.coord(node)) {
            values[node] = barrier_value(rho(grid, node, ball.center), m_r, f, grid.dim())?;
            support.push(node);
        }
    }
    Ok(FieldFunction::from_values(values).with_support(support))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BarrierReport {
    /// `max |Δ_h w − k₁m_R wᵖ|`, which vanishes with `h` for constant `m⁻`.
    pub max_identity_residual: f64,
    /// `max (Δ_h w − k₁m⁻wᵖ − |Δ_h w − Δw|)`, nonpositive when the
    /// inequality holds up to the computed truncation error.
    pub max_excess: f64,
    pub worst_node: Option<usize>,
    pub nodes_checked: usize,
    pub pass: bool,
}

/// Checks `Δ_h w ≤ k₁m⁻wᵖ` at ball nodes whose whole stencil is regular and
/// inside the closed ball.
pub fn barrier_verify(grid: &Grid, w: &FieldFunction, m: &WeightField, f: &NonlinearityH1, ball: &Ball, m_r: f64) -> Result<BarrierReport> {
    let mv = m.values();
    let h = grid.spacing();
    let nodes = w.support().map(<[usize]>::to_vec).unwrap_or_else(|| (0..grid.len()).collect());
    if let Some(&n) = nodes.iter().find(|&&n| mv[n] > 0.0) {
        return Err(Error::Precondition(format!("weight is positive at ball node {n}")));
    }
    let mut out = BarrierReport { max_identity_residual: 0.0, max_excess: f64::NEG_INFINITY, worst_node: None, nodes_checked: 0, pass: true };
    let scale = nodes.iter().map(|&n| f.k1() * m_r * f.eval(w.get(n))).fold(1e-300f64, f64::max);
    for &node in &nodes {
        let Some(arms) = grid.arms(node) else { continue };
        let arms = &arms[..2 * grid.dim()];
        if arms.iter().any(|a| (a.length - h).abs() > 1e-9 * h || !ball.contains_closed(grid.coord(a.node))) {
            continue;
        }
        let w0 = w.get(node);
        let lap_h: f64 = arms.iter().map(|a| w.get(a.node) - w0).sum::<f64>() / (h * h);
        let wp = w0.max(0.0).powf(f.p());
        let lap = barrier_laplacian(rho(grid, node, ball.center), m_r, f, grid.dim())?;
        out.max_identity_residual = out.max_identity_residual.max((lap_h - f.k1() * m_r * wp).abs());
        let excess = lap_h - f.k1() * (-mv[node]) * wp - (lap_h - lap).abs() - 1e-12 * scale;
        if excess > out.max_excess {
            out.max_excess = excess;
            out.worst_node = Some(node);
        }
        out.nodes_checked += 1;
    }
    out.pass = out.max_excess <= 0.0;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct NonexistenceCertificate {
    pub verdict: Verdict,
    pub cnp: f64,
    pub r: f64,
    pub green_norm: GreenNorm,
    pub m_plus_norm: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub balls_considered: usize,
    pub best: Option<ScoredBall>,
    pub barrier: Option<(FieldFunction, BarrierReport)>,
}

/// `LHS = C/‖G‖·max(m_R R²)` against `RHS = (k₂/k₁)‖m⁺‖_{L^r}`, with `r`
/// the weight's exponent and `‖G‖` the `L^r → L^∞` norm.
pub fn theorem32_certify(grid: &Grid, op: &DiscreteOperator, m: &WeightField, f: &NonlinearityH1, max_green_rows: usize) -> Result<NonexistenceCertificate> {
    let c = cnp(grid.dim(), f.p())?;
    let r = m.exponent();
    let green_norm = green_operator_norm_with(op, r, max_green_rows)?;
    let all: Vec<usize> = (0..grid.len()).collect();
    let m_plus_norm = lr_norm(m.positive_part().values(), grid, r, &all).value;
    let balls = enumerate_nonpositive_balls(grid, m);
    let best = balls.first().cloned();
    let score = best.as_ref().map_or(0.0, |b| b.score);
    let lhs = c / green_norm.value * score;
    let rhs = f.k2() / f.k1() * m_plus_norm;
    let verdict = if m_plus_norm == 0.0 {
        Verdict::TrivialObstruction
    } else if best.is_some() && lhs >= rhs {
        Verdict::NonexistenceCertified
    } else {
        Verdict::NoInformation
    };
    let barrier = match &best {
        Some(b) if b.m_r > 0.0 => {
            let w = barrier_field(grid, &b.ball, b.m_r, f)?;
            let report = barrier_verify(grid, &w, m, f, &b.ball, b.m_r)?;
            Some((w, report))
        }
        _ => None,
    };
    Ok(NonexistenceCertificate { verdict, cnp: c, r, green_norm, m_plus_norm, lhs, rhs, balls_considered: balls.len(), best, barrier })
}

#[derive(Clone, Debug)]
pub struct IntegralCriterionReport {
    pub convexity: ConvexityReport,
    pub cnp: f64,
    pub region_measure: f64,
    pub green_norm: GreenNorm,
    /// `Σ_{Ω₁} m⁻ δ_{Ω₁}² vol`.
    pub weighted_sum: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `‖m⁺‖_{L^r}` over the nodes outside closure(Ω₁) and over all nodes.
    pub m_plus_norm_outside: f64,
    pub m_plus_norm_full: f64,
    pub samples_checked: usize,
    /// `min over samples of (min_{ball} m⁻) − m⁻(x₁)/3`.
    pub worst_margin: f64,
    pub ingredient_pass: bool,
    pub verdict: Verdict,
}

pub const INGREDIENT_SAMPLES: usize = 50;

/// Integral criterion for `m` convex and nonpositive on the convex `region`.
pub fn corollary33_certify(
    grid: &Grid,
    op: &DiscreteOperator,
    m: &WeightField,
    f: &NonlinearityH1,
    region: &SubRegion,
    max_green_rows: usize,
) -> Result<IntegralCriterionReport> {
    let convexity = check_convex_nonpositive(m, grid, region);
    if !convexity.pass() {
        return Err(Error::Precondition(format!(
            "weight is not convex and nonpositive on the region (node {:?})",
            convexity.worst_node
        )));
    }
    let c = cnp(grid.dim(), f.p())?;
    let r = m.exponent();
    let green_norm = green_operator_norm_with(op, r, max_green_rows)?;
    let nodes = region_nodes(grid, region);
    let minus = m.negative_part();
    let mm = minus.values();
    let delta: Vec<f64> = (0..grid.len()).map(|n| region.inner_distance(grid.coord(n))).collect();
    let weighted_sum: f64 = nodes.iter().map(|&n| mm[n] * delta[n] * delta[n] * grid.volume(n)).sum();
    let region_measure = region.measure();
    let lhs = 4.0 * c / (27.0 * region_measure * green_norm.value) * weighted_sum;

    let plus = m.positive_part();
    let outside: Vec<usize> = (0..grid.len()).filter(|&n| !region.contains_closed(grid.coord(n))).collect();
    let all: Vec<usize> = (0..grid.len()).collect();
    let m_plus_norm_outside = lr_norm(plus.values(), grid, r, &outside).value;
    let m_plus_norm_full = lr_norm(plus.values(), grid, r, &all).value;
    if m_plus_norm_outside != m_plus_norm_full {
        return Err(Error::Verification {
            node: 0,
            msg: "‖m⁺‖ over Ω and over Ω − closure(Ω₁) differ".into(),
            excess: m_plus_norm_full - m_plus_norm_outside,
        });
    }
    let rhs = f.k2() / f.k1() * m_plus_norm_outside;

    let candidates: Vec<usize> = nodes.iter().copied().filter(|&n| delta[n] > 0.0 && grid.is_interior(n)).collect();
    let stride = (candidates.len() / INGREDIENT_SAMPLES).max(1);
    let samples: Vec<usize> = candidates.iter().step_by(stride).take(INGREDIENT_SAMPLES).copied().collect();
    let mut worst_margin = f64::INFINITY;
    for &x1 in &samples {
        let ball = Ball { center: grid.coord(x1), radius: 2.0 / 3.0 * delta[x1] };
        let low = nodes
            .iter()
            .filter(|&&n| ball.contains_closed(grid.coord(n)))
            .map(|&n| mm[n])
            .fold(f64::INFINITY, f64::min);
        worst_margin = worst_margin.min(low - mm[x1] / 3.0);
    }
    let tol = 1e-12 * mm.iter().fold(1.0f64, |a, &v| a.max(v));
    let ingredient_pass = !samples.is_empty() && worst_margin >= -tol;
    let verdict = if m_plus_norm_full == 0.0 {
        Verdict::TrivialObstruction
    } else if lhs >= rhs {
        Verdict::NonexistenceCertified
    } else {
        Verdict::NoInformation
    };
    Ok(IntegralCriterionReport {
        convexity,
        cnp: c,
        region_measure,
        green_norm,
        weighted_sum,
        lhs,
        rhs,
        m_plus_norm_outside,
        m_plus_norm_full,
        samples_checked: samples.len(),
        worst_margin,
        ingredient_pass,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::MAX_GREEN_ROWS;
    use crate::geometry::Domain;

    fn unit(res: usize) -> (Grid, DiscreteOperator) {
        let g = Grid::new(Domain::unit_interval(), res).unwrap();
        let op = DiscreteOperator::new(&g).unwrap();
        (g, op)
    }

    #[test]
    fn barrier_values() {
        let f = NonlinearityH1::power(0.5, 1.0).unwrap();
        assert_eq!(barrier_value(0.0, 1.0, &f, 1).unwrap(), 0.0);
        assert!((barrier_value(1.0, 1.0, &f, 1).unwrap() - 1.0 / 144.0).abs() < 1e-16);
        // the closed-form Laplacian equals k₁m_R wᵖ
        for (n, p) in [(1, 0.5), (2, 0.5), (1, 0.75), (3, 0.3)] {
            let f = NonlinearityH1::power(p, 1.0).unwrap();
            let (w, lap) = (barrier_value(0.7, 2.0, &f, n).unwrap(), barrier_laplacian(0.7, 2.0, &f, n).unwrap());
            assert!((lap - 2.0 * w.powf(p)).abs() < 1e-13 * lap.max(1e-300), "{n} {p}");
        }
    }

    #[test]
    fn sign_changing_weight_gives_no_information() {
        let (g, op) = unit(240);
        let m = WeightField::from_fn(&g, |p| p[0] - 0.5);
        let f = NonlinearityH1::power(0.5, 1.0).unwrap();
        let c = theorem32_certify(&g, &op, &m, &f, MAX_GREEN_ROWS).unwrap();
        assert_eq!(c.verdict, Verdict::NoInformation);
        assert!((c.lhs / (1.0 / 324.0) - 1.0).abs() < 0.05, "{}", c.lhs);
        assert!((c.rhs - 0.5).abs() < 1e-12);
        assert!(c.barrier.unwrap().1.pass);
        let neg = WeightField::from_fn(&g, |_| -1.0);
        assert_eq!(theorem32_certify(&g, &op, &neg, &f, MAX_GREEN_ROWS).unwrap().verdict, Verdict::TrivialObstruction);
    }

    #[test]
    fn barrier_rejects_positive_weight() {
        let (g, _) = unit(40);
        let f = NonlinearityH1::power(0.5, 1.0).unwrap();
        let ball = Ball { center: [0.5, 0.0], radius: 0.2 };
        let w = barrier_field(&g, &ball, 1.0, &f).unwrap();
        let m = WeightField::from_fn(&g, |_| 1.0);
        assert!(barrier_verify(&g, &w, &m, &f, &ball, 1.0).is_err());
        let m = WeightField::from_fn(&g, |p| -1.0 - 3.0 * p[0]);
        assert!(barrier_verify(&g, &w, &m, &f, &ball, 1.0).unwrap().pass);
    }

    #[test]
    fn integral_criterion_closed_form() {
        let (g, op) = unit(256);
        let m = WeightField::from_fn(&g, |p| if p[0] <= 0.5 { -1.0 } else { 0.2 });
        let f = NonlinearityH1::power(0.5, 1.0).unwrap();
        let region = SubRegion::Interval { a: 0.0, b: 0.5 };
        let rep = corollary33_certify(&g, &op, &m, &f, &region, MAX_GREEN_ROWS).unwrap();
        assert!((rep.weighted_sum * 96.0 - 1.0).abs() < 0.01);
        assert!((rep.lhs / 2.0576e-3 - 1.0).abs() < 0.02, "{}", rep.lhs);
        assert!(rep.ingredient_pass && rep.samples_checked == INGREDIENT_SAMPLES);
        assert_eq!(rep.verdict, Verdict::NoInformation);
        let bad = WeightField::from_fn(&g, |p| (6.0 * p[0]).sin() - 2.0);
        assert!(corollary33_certify(&g, &op, &bad, &f, &region, MAX_GREEN_ROWS).is_err());
    }
}
