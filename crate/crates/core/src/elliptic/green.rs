use rayon::prelude::*;

use super::operator::DiscreteOperator;
use crate::error::Result;

/// Rows of the Green matrix computed in full before stride subsampling engages.
pub const MAX_GREEN_ROWS: usize = 50_000;

/// Discrete norm of the solution map `L^r → L^∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenNorm {
    pub value: f64,
    pub r: f64,
    /// Only a stride subset of rows was used; `value` is then a lower bound.
    pub subsampled: bool,
    pub rows: usize,
}

/// Largest `c` with `u(x) ≥ c·δ(x)·Σ_y h(y)δ(y)vol_y` for every `h ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MorelOswald {
    pub c: f64,
    /// Only a stride subset of rows was used; `c` is then an upper bound.
    pub subsampled: bool,
    /// Nodes `(x, y)` attaining the minimum ratio.
    pub argmin: (usize, usize),
}

/// Torsion function: `−Δ_h u = 1`, zero data.
pub fn torsion(op: &DiscreteOperator) -> Result<Vec<f64>> {
    let n = op.n_nodes();
    op.solve(&vec![1.0; n], &vec![0.0; n])
}

/// Row `x` of the discrete Green function, `G(x, y) = (A⁻¹)_{xy} / vol_y`,
/// indexed by unknown.
pub fn green_row(op: &DiscreteOperator, x: usize) -> Result<Vec<f64>> {
    let f = op.factorization()?;
    let mut e = vec![0.0; op.size()];
    e[x] = 1.0;
    f.solve_transpose_in_place(&mut e);
    for (g, v) in e.iter_mut().zip(op.volumes()) {
        *g /= v;
    }
    Ok(e)
}

fn sampled_rows(n: usize, max_rows: usize) -> (Vec<usize>, bool) {
    if n <= max_rows {
        return ((0..n).collect(), false);
    }
    let stride = n.div_ceil(max_rows);
    ((0..n).step_by(stride).collect(), true)
}

/// Applies `per_row` to Green rows in parallel; results come back in row order.
fn map_rows<T: Send>(op: &DiscreteOperator, rows: &[usize], per_row: impl Fn(usize, &[f64]) -> T + Sync) -> Result<Vec<T>> {
    op.factorization()?;
    rows.par_iter()
        .map(|&x| green_row(op, x).map(|g| per_row(x, &g)))
        .collect()
}

pub fn green_operator_norm(op: &DiscreteOperator, r: f64) -> Result<GreenNorm> {
    green_operator_norm_with(op, r, MAX_GREEN_ROWS)
}

/// For `r = ∞` the norm is the torsion maximum; for finite `r` it is
/// `max_x (Σ_y G(x,y)^{r'} vol_y)^{1/r'}` with `r' = r/(r−1)`.
pub fn green_operator_norm_with(op: &DiscreteOperator, r: f64, max_rows: usize) -> Result<GreenNorm> {
    if r.is_infinite() {
        let t = torsion(op)?;
        let value = op.unknowns().iter().map(|&n| t[n]).fold(0.0, f64::max);
        return Ok(GreenNorm { value, r, subsampled: false, rows: op.size() });
    }
    let dual = r / (r - 1.0);
    let (rows, subsampled) = sampled_rows(op.size(), max_rows);
    let vols = op.volumes();
    let norms = map_rows(op, &rows, |_, g| {
        let s: f64 = g.iter().zip(vols).map(|(&gv, &v)| gv.abs().powf(dual) * v).sum();
        s.powf(1.0 / dual)
    })?;
    let value = norms.into_iter().fold(0.0, f64::max);
    Ok(GreenNorm { value, r, subsampled, rows: rows.len() })
}

pub fn morel_oswald_constant(op: &DiscreteOperator, delta: &[f64]) -> Result<MorelOswald> {
    morel_oswald_constant_with(op, delta, MAX_GREEN_ROWS)
}

/// `min G(x,y)/(δ(x)δ(y))` over pairs of unknowns.
pub fn morel_oswald_constant_with(op: &DiscreteOperator, delta: &[f64], max_rows: usize) -> Result<MorelOswald> {
    let (rows, subsampled) = sampled_rows(op.size(), max_rows);
    let nodes = op.unknowns();
    let mins = map_rows(op, &rows, |x, g| {
        let dx = delta[nodes[x]];
        let mut best = (f64::INFINITY, 0);
        for (y, &gv) in g.iter().enumerate() {
            let ratio = gv / (dx * delta[nodes[y]]);
            if ratio < best.0 {
                best = (ratio, y);
            }
        }
        (best.0, x, best.1)
    })?;
    let (c, x, y) = mins
        .into_iter()
        .fold((f64::INFINITY, 0, 0), |acc, m| if m.0 < acc.0 { m } else { acc });
    Ok(MorelOswald { c, subsampled, argmin: (nodes[x], nodes[y]) })
}
