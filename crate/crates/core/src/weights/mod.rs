//! Weight fields `m`, their positive and negative parts, discrete `L^r`
//! norms and δ-weighted integrals, plus the H1 nonlinearity family.

pub mod expr;
mod nonlinearity;

pub use expr::Expr;
pub use nonlinearity::{validate_h1, Evaluator, H1Report, NonlinearityH1};

use crate::error::{Error, Result};
use crate::field::FieldFunction;
use crate::geometry::{Grid, Point, SubRegion};

/// Region claimed by one analytic piece of a weight definition.
#[derive(Clone, Debug, PartialEq)]
pub enum PieceRegion {
    All,
    Interval { a: f64, b: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { cx: f64, cy: f64, radius: f64 },
}

impl PieceRegion {
    /// Parses `all`, `[a,b]`, `[x0,x1]x[y0,y1]` or `disk(cx,cy,r)`.
    /// Round and square brackets are accepted alike; regions are closed.
    pub fn parse(src: &str) -> Result<Self> {
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::InvalidWeight(format!("cannot parse region '{src}'"));
        let nums = |body: &str| -> Result<Vec<f64>> {
            body.split(',')
                .map(|t| Expr::parse(t).ok().map(|e| e.eval(0.0, 0.0)).ok_or_else(bad))
                .collect()
        };
        if s == "all" {
            return Ok(PieceRegion::All);
        }
        if let Some(body) = s.strip_prefix("disk(").and_then(|b| b.strip_suffix(')')) {
            let v = nums(body)?;
            if v.len() != 3 || v[2] <= 0.0 {
                return Err(bad());
            }
            return Ok(PieceRegion::Disk { cx: v[0], cy: v[1], radius: v[2] });
        }
        let interval = |t: &str| -> Result<(f64, f64)> {
            let inner = t
                .strip_prefix(['[', '('])
                .and_then(|b| b.strip_suffix([']', ')']))
                .ok_or_else(bad)?;
            let v = nums(inner)?;
            if v.len() != 2 || v[1] < v[0] {
                return Err(bad());
            }
            Ok((v[0], v[1]))
        };
        let split = s.find([']', ')']).map(|i| i + 1).ok_or_else(bad)?;
        if split == s.len() {
            let (a, b) = interval(&s)?;
            return Ok(PieceRegion::Interval { a, b });
        }
        let rest = s[split..].strip_prefix('x').ok_or_else(bad)?;
        let (x0, x1) = interval(&s[..split])?;
        let (y0, y1) = interval(rest)?;
        Ok(PieceRegion::Rectangle { x0, x1, y0, y1 })
    }

    pub fn contains(&self, p: Point) -> bool {
        let tol = 1e-12;
        match *self {
            PieceRegion::All => true,
            PieceRegion::Interval { a, b } => p[0] >= a - tol && p[0] <= b + tol,
            PieceRegion::Rectangle { x0, x1, y0, y1 } => {
                p[0] >= x0 - tol && p[0] <= x1 + tol && p[1] >= y0 - tol && p[1] <= y1 + tol
            }
            PieceRegion::Disk { cx, cy, radius } => {
                (p[0] - cx).hypot(p[1] - cy) <= radius + tol
            }
        }
    }
}

/// One `region = …; expr = …` entry of a weight definition.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightPiece {
    pub region: PieceRegion,
    pub expr: Expr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Expression value at the node.
    Nodal,
    /// Tensor 3-point Gauss average over the node's cell (9 points in 2D).
    CellAverage,
}

/// Nodal values of `m` with the integrability exponent `r` (`f64::INFINITY` for `r = ∞`).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightField {
    values: Vec<f64>,
    r: f64,
    sampling: Sampling,
}

impl WeightField {
    pub fn from_values(values: Vec<f64>) -> Self {
        WeightField { values, r: f64::INFINITY, sampling: Sampling::Nodal }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(Point) -> f64) -> Self {
        Self::from_values(grid.coords().iter().map(|&p| f(p)).collect())
    }

    /// Evaluates a piecewise definition. Each node takes the first piece (in
    /// declaration order) whose closed region contains it.
    pub fn from_pieces(grid: &Grid, pieces: &[WeightPiece], sampling: Sampling, r: f64) -> Result<Self> {
        let h = grid.spacing();
        let gauss = [(-(0.6f64).sqrt(), 5.0 / 18.0), (0.0, 8.0 / 18.0), ((0.6f64).sqrt(), 5.0 / 18.0)];
        let mut values = Vec::with_capacity(grid.len());
        for (node, &p) in grid.coords().iter().enumerate() {
            let piece = pieces.iter().find(|pc| pc.region.contains(p)).ok_or_else(|| {
                Error::InvalidWeight(format!("node {node} at {p:?} is not claimed by any weight piece"))
            })?;
            let v = match sampling {
                Sampling::Nodal => piece.expr.eval(p[0], p[1]),
                Sampling::CellAverage => {
                    let ys: &[(f64, f64)] = if grid.dim() == 1 { &[(0.0, 1.0)] } else { &gauss };
                    let mut acc = 0.0;
                    for &(gx, wx) in &gauss {
                        for &(gy, wy) in ys {
                            acc += wx * wy * piece.expr.eval(p[0] + 0.5 * h * gx, p[1] + 0.5 * h * gy);
                        }
                    }
                    acc
                }
            };
            if !v.is_finite() {
                return Err(Error::InvalidWeight(format!("weight is not finite at node {node} ({p:?})")));
            }
            values.push(v);
        }
        Ok(WeightField { values, r, sampling }.with_exponent(r, grid.dim())?)
    }

    /// Sets the integrability exponent; requires `r > N`.
    pub fn with_exponent(mut self, r: f64, dim: usize) -> Result<Self> {
        if !(r > dim as f64) {
            return Err(Error::InvalidWeight(format!("exponent r = {r} must exceed N = {dim}")));
        }
        self.r = r;
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exponent(&self) -> f64 {
        self.r
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    pub fn scaled(&self, c: f64) -> Self {
        WeightField { values: self.values.iter().map(|v| c * v).collect(), ..self.clone() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        WeightField { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// `(m⁺, m⁻)` with `m = m⁺ − m⁻`.
    pub fn split_pm(&self) -> (WeightField, WeightField) {
        (self.map(|v| v.max(0.0)), self.map(|v| (-v).max(0.0)))
    }

    pub fn positive_part(&self) -> WeightField {
        self.map(|v| v.max(0.0))
    }

    pub fn negative_part(&self) -> WeightField {
        self.map(|v| (-v).max(0.0))
    }

    pub fn as_field(&self) -> FieldFunction {
        FieldFunction::from_values(self.values.clone())
    }
}

/// Discrete `L^r` norm over a node set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LrNorm {
    pub value: f64,
    /// Set when the region has no nodes (the value is then 0).
    pub empty_region: bool,
}

/// `(Σ |vᵢ|^r volᵢ)^{1/r}` over `region`, or `max |vᵢ|` for `r = ∞`.
pub fn lr_norm(values: &[f64], grid: &Grid, r: f64, region: &[usize]) -> LrNorm {
    if region.is_empty() {
        return LrNorm { value: 0.0, empty_region: true };
    }
    let value = if r.is_infinite() {
        region.iter().map(|&i| values[i].abs()).fold(0.0, f64::max)
    } else {
        let scale = region.iter().map(|&i| values[i].abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            0.0
        } else {
            let s: f64 = region.iter().map(|&i| (values[i].abs() / scale).powf(r) * grid.volume(i)).sum();
            scale * s.powf(1.0 / r)
        }
    };
    LrNorm { value, empty_region: false }
}

/// `Σ mᵢ δᵢ^q volᵢ` over `region`.
pub fn weighted_delta_integral(m: &[f64], delta: &[f64], grid: &Grid, q: f64, region: &[usize]) -> f64 {
    region.iter().map(|&i| m[i] * delta[i].powf(q) * grid.volume(i)).sum()
}

/// Nodes of `grid` lying in the closed `region`.
pub fn region_nodes(grid: &Grid, region: &SubRegion) -> Vec<usize> {
    (0..grid.len()).filter(|&i| region.contains_closed(grid.coord(i))).collect()
}

/// Outcome of the sign and midpoint-convexity scan of `m` on a convex set.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityReport {
    pub nonpositive: bool,
    pub convex: bool,
    pub pairs_checked: usize,
    /// First node where a check failed.
    pub worst_node: Option<usize>,
}

impl ConvexityReport {
    pub fn pass(&self) -> bool {
        self.nonpositive && self.convex
    }
}

/// Checks `m ≤ 0` on the region nodes and `m((a+b)/2) ≤ (m(a)+m(b))/2` on
/// node pairs symmetric about a region node along axis and diagonal
/// directions with steps 1, 2, 4, ….
pub fn check_convex_nonpositive(m: &WeightField, grid: &Grid, region: &SubRegion) -> ConvexityReport {
    let nodes = region_nodes(grid, region);
    let v = m.values();
    let scale = nodes.iter().map(|&i| v[i].abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(1e-300);
    let mut report = ConvexityReport { nonpositive: true, convex: true, pairs_checked: 0, worst_node: None };
    for &i in &nodes {
        if v[i] > tol && report.nonpositive {
            report.nonpositive = false;
            report.worst_node.get_or_insert(i);
        }
    }
    let in_region = |n: usize| region.contains_closed(grid.coord(n));
    let dirs: &[[isize; 2]] = if grid.dim() == 1 { &[[1, 0]] } else { &[[1, 0], [0, 1], [1, 1], [1, -1]] };
    for &mid in &nodes {
        for d in dirs {
            let mut s = 1isize;
            loop {
                let a = grid.lattice_step(mid, -s * d[0], -s * d[1]).filter(|&n| in_region(n));
                let b = grid.lattice_step(mid, s * d[0], s * d[1]).filter(|&n| in_region(n));
                let (Some(a), Some(b)) = (a, b) else { break };
                report.pairs_checked += 1;
                if v[mid] > 0.5 * (v[a] + v[b]) + tol && report.convex {
                    report.convex = false;
                    report.worst_node.get_or_insert(mid);
                }
                s *= 2;
            }
        }
    }
    report
}
