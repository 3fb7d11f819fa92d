//! Nodal scalar fields and the shared CSV dump format.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::geometry::Grid;

/// Nodal values over every node of a grid.
///
/// Fields living on part of the grid (for instance `w` on Ω₁) carry a
/// `support` node list; values outside the support are zero and are not
/// written to dumps.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFunction {
    values: Vec<f64>,
    support: Option<Vec<usize>>,
}

impl FieldFunction {
    pub fn from_values(values: Vec<f64>) -> Self {
        FieldFunction { values, support: None }
    }

    pub fn zeros(len: usize) -> Self {
        Self::from_values(vec![0.0; len])
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self::from_values(vec![value; len])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::from_values(grid.coords().iter().map(|&p| f(p)).collect())
    }

    /// Restricts the field to `support` (sorted ascending on output).
    pub fn with_support(mut self, mut support: Vec<usize>) -> Self {
        support.sort_unstable();
        support.dedup();
        self.support = Some(support);
        self
    }

    pub fn support(&self) -> Option<&[usize]> {
        self.support.as_deref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        FieldFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
            support: self.support.clone(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.nodes().map(|i| self.values[i].abs()).fold(0.0, f64::max)
    }

    /// Nodes carrying data: the support if set, otherwise every node.
    pub fn nodes(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.support {
            Some(s) => Box::new(s.iter().copied()),
            None => Box::new(0..self.values.len()),
        }
    }

    /// Renders the field as CSV: header `x[,y],value`, 17 significant digits,
    /// rows in ascending node index.
    pub fn to_csv(&self, grid: &Grid) -> String {
        let two_d = grid.dim() == 2;
        let mut out = String::from(if two_d { "x,y,value\n" } else { "x,value\n" });
        for i in self.nodes() {
            let p = grid.coord(i);
            if two_d {
                let _ = writeln!(out, "{},{},{}", fmt17(p[0]), fmt17(p[1]), fmt17(self.values[i]));
            } else {
                let _ = writeln!(out, "{},{}", fmt17(p[0]), fmt17(self.values[i]));
            }
        }
        out
    }

    pub fn write_csv(&self, grid: &Grid, path: &Path) -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv(grid).as_bytes())
    }
}

/// 17-significant-digit decimal rendering.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, Grid};

    #[test]
    fn csv_layout() {
        let g = Grid::new(Domain::unit_interval(), 4).unwrap();
        let f = FieldFunction::from_fn(&g, |p| p[0] * 2.0).with_support(vec![2, 1]);
        let csv = f.to_csv(&g);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,value");
        assert_eq!(lines[1], "2.5000000000000000e-1,5.0000000000000000e-1");
        assert_eq!(lines.len(), 3);
        let back: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, 1.0);
    }
}
