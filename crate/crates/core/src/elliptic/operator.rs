use std::collections::HashMap;
use std::sync::OnceLock;

use super::banded::{BandMatrix, Factorization};
use crate::error::{Error, Result};
use crate::field::FieldFunction;
use crate::geometry::Grid;

/// Relative residual accepted from a direct solve.
pub const LINEAR_TOL: f64 = 1e-10;

/// `−Δ_h` restricted to a set of unknown interior nodes; every other node
/// entering a stencil is Dirichlet data.
///
/// Rows use the unequal-arm three-point formula on each axis,
/// `2/(h₋h₊)·u₀ − 2/(h₊(h₋+h₊))·u₊ − 2/(h₋(h₋+h₊))·u₋`, which reduces to the
/// five-point stencil away from disk cut nodes.
#[derive(Debug)]
pub struct DiscreteOperator {
    n_nodes: usize,
    unknowns: Vec<usize>,
    index: HashMap<usize, usize>,
    /// Per unknown: `(node, coefficient)` for every stencil node, diagonal first.
    stencil: Vec<Vec<(usize, f64)>>,
    matrix: BandMatrix,
    volume: Vec<f64>,
    symmetric: bool,
    factor: OnceLock<Factorization>,
}

impl DiscreteOperator {
    /// Operator on all interior nodes of the grid.
    pub fn new(grid: &Grid) -> Result<Self> {
        Self::on_nodes(grid, grid.interior())
    }

    /// Operator on the given interior nodes.
    pub fn on_nodes(grid: &Grid, nodes: &[usize]) -> Result<Self> {
        let mut unknowns = nodes.to_vec();
        unknowns.sort_unstable();
        unknowns.dedup();
        if unknowns.is_empty() {
            return Err(Error::Solver("operator has no unknowns".into()));
        }
        let index: HashMap<usize, usize> = unknowns.iter().enumerate().map(|(k, &n)| (n, k)).collect();
        let axes = grid.dim();
        let mut stencil = Vec::with_capacity(unknowns.len());
        for &node in &unknowns {
            let arms = grid
                .arms(node)
                .ok_or_else(|| Error::Solver(format!("node {node} is not an interior node")))?;
            let mut row = vec![(node, 0.0)];
            for axis in 0..axes {
                let (plus, minus) = (arms[2 * axis], arms[2 * axis + 1]);
                let (hp, hm) = (plus.length, minus.length);
                row[0].1 += 2.0 / (hp * hm);
                row.push((plus.node, -2.0 / (hp * (hp + hm))));
                row.push((minus.node, -2.0 / (hm * (hp + hm))));
            }
            stencil.push(row);
        }
        let rows = stencil
            .iter()
            .map(|row| {
                row.iter()
                    .filter_map(|&(n, c)| index.get(&n).map(|&j| (j, c)))
                    .collect()
            })
            .collect();
        let matrix = BandMatrix::from_rows(rows);
        let symmetric = matrix.is_symmetric();
        let volume = unknowns.iter().map(|&n| grid.volume(n)).collect();
        Ok(DiscreteOperator {
            n_nodes: grid.len(),
            unknowns,
            index,
            stencil,
            matrix,
            volume,
            symmetric,
            factor: OnceLock::new(),
        })
    }

    pub fn unknowns(&self) -> &[usize] {
        &self.unknowns
    }

    pub fn size(&self) -> usize {
        self.unknowns.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn matrix(&self) -> &BandMatrix {
        &self.matrix
    }

    /// Cell volumes of the unknowns, in unknown order.
    pub fn volumes(&self) -> &[f64] {
        &self.volume
    }

    pub fn index_of(&self, node: usize) -> Option<usize> {
        self.index.get(&node).copied()
    }

    /// Scale used for relative tolerances (largest row sum).
    pub fn scale(&self) -> f64 {
        self.matrix.inf_norm()
    }

    /// `(−Δ_h u)` at the unknowns, reading neighbours from the full nodal vector.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.stencil.iter().map(|row| row.iter().map(|&(n, c)| c * u[n]).sum()).collect()
    }

    /// Cached factorization of the unshifted matrix.
    pub fn factorization(&self) -> Result<&Factorization> {
        if let Some(f) = self.factor.get() {
            return Ok(f);
        }
        let f = Factorization::new(&self.matrix, None, self.symmetric)?;
        Ok(self.factor.get_or_init(|| f))
    }

    /// Fresh factorization of `A + diag(shift)`.
    pub fn factor_shifted(&self, shift: &[f64]) -> Result<Factorization> {
        let spd = self.symmetric && shift.iter().all(|&s| s >= 0.0);
        Factorization::new(&self.matrix, Some(shift), spd)
    }

    /// Right-hand side at the unknowns after moving Dirichlet couplings across.
    pub fn load(&self, rhs: &[f64], data: &[f64]) -> Vec<f64> {
        self.unknowns
            .iter()
            .zip(&self.stencil)
            .map(|(&node, row)| {
                rhs[node]
                    - row[1..]
                        .iter()
                        .filter(|(n, _)| !self.index.contains_key(n))
                        .map(|&(n, c)| c * data[n])
                        .sum::<f64>()
            })
            .collect()
    }

    /// Solves `(A + diag(shift)) x = b` for the unknowns and returns the full
    /// nodal vector (data at non-unknown nodes). Checks the relative residual.
    pub fn solve_with(&self, factor: &Factorization, shift: Option<&[f64]>, rhs: &[f64], data: &[f64]) -> Result<Vec<f64>> {
        let b = self.load(rhs, data);
        let mut x = b.clone();
        factor.solve_in_place(&mut x);
        let mut full = data.to_vec();
        for (k, &node) in self.unknowns.iter().enumerate() {
            full[node] = x[k];
        }
        let ax = self.matrix.mul(&x);
        let (mut res, mut scale) = (0.0f64, 0.0f64);
        for k in 0..x.len() {
            let s = shift.map_or(0.0, |s| s[k]);
            res = res.max((ax[k] + s * x[k] - b[k]).abs());
            scale = scale.max(b[k].abs()).max((self.matrix.rows[k][0].1 + s) * x[k].abs());
        }
        if res > LINEAR_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Solver(format!("relative residual {:.3e} exceeds {LINEAR_TOL:e}", res / scale)));
        }
        Ok(full)
    }

    /// Solves `−Δ_h u = rhs` at the unknowns with `u = data` elsewhere.
    pub fn solve(&self, rhs: &[f64], data: &[f64]) -> Result<Vec<f64>> {
        self.solve_with(self.factorization()?, None, rhs, data)
    }
}

/// `−Δ_h u = rhs` on the interior, `u = boundary` on the boundary nodes.
pub fn solve_dirichlet(op: &DiscreteOperator, rhs: &FieldFunction, boundary: &FieldFunction) -> Result<FieldFunction> {
    check_finite(rhs.values(), "rhs")?;
    check_finite(boundary.values(), "boundary data")?;
    op.solve(rhs.values(), boundary.values()).map(FieldFunction::from_values)
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::Solver(format!("{what} is not finite at node {i}"))),
        None => Ok(()),
    }
}
