//! Banded direct factorizations for the five-point Laplacian.
//!
//! Lexicographic node ordering keeps the stencil within a band of width one
//! grid row, so a dense band is both simple and fast at the grid sizes used
//! here. Symmetric operators use Cholesky; operators with unequal-arm rows
//! (disk cut nodes) use LU without pivoting, which is stable for the
//! diagonally dominant M-matrices produced by the stencil.

use crate::error::{Error, Result};

/// Sparse matrix in row-compressed form with a known bandwidth.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    pub n: usize,
    /// `rows[i]` holds `(column, value)` pairs, diagonal included.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub lower: usize,
    pub upper: usize,
}

impl BandMatrix {
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let (mut lower, mut upper) = (0, 0);
        for (i, row) in rows.iter().enumerate() {
            for &(j, _) in row {
                if j < i {
                    lower = lower.max(i - j);
                } else {
                    upper = upper.max(j - i);
                }
            }
        }
        BandMatrix { n, rows, lower, upper }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        let get = |i: usize, j: usize| {
            self.rows[i].iter().filter(|e| e.0 == j).map(|e| e.1).sum::<f64>()
        };
        self.rows.iter().enumerate().all(|(i, row)| {
            row.iter().all(|&(j, v)| {
                let t = get(j, i);
                (v - t).abs() <= 1e-12 * v.abs().max(t.abs())
            })
        })
    }

    /// Largest absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.rows.iter().map(|r| r.iter().map(|e| e.1.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

/// Factorization of `A + diag(shift)`.
#[derive(Clone, Debug)]
pub enum Factorization {
    Cholesky(BandCholesky),
    Lu(BandLu),
}

impl Factorization {
    pub fn new(a: &BandMatrix, shift: Option<&[f64]>, symmetric: bool) -> Result<Self> {
        if symmetric {
            BandCholesky::new(a, shift).map(Factorization::Cholesky)
        } else {
            BandLu::new(a, shift).map(Factorization::Lu)
        }
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        match self {
            Factorization::Cholesky(c) => c.solve_in_place(b),
            Factorization::Lu(l) => l.solve_in_place(b),
        }
    }

    /// Solves with the transposed matrix.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        match self {
            Factorization::Cholesky(c) => c.solve_in_place(b),
            Factorization::Lu(l) => l.solve_transpose_in_place(b),
        }
    }
}

/// `A = L Lᵀ` with `L` stored as a lower band.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn new(a: &BandMatrix, shift: Option<&[f64]>) -> Result<Self> {
        let n = a.n;
        let bw = a.lower.max(a.upper);
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for (i, row) in a.rows.iter().enumerate() {
            for &(j, v) in row {
                if j <= i {
                    l[i * w + (j + bw - i)] += v;
                }
            }
            if let Some(s) = shift {
                l[i * w + bw] += s[i];
            }
        }
        for j in 0..n {
            let jlo = j.saturating_sub(bw);
            let mut d = l[j * w + bw];
            for k in jlo..j {
                let v = l[j * w + (k + bw - j)];
                d -= v * v;
            }
            if !(d > 0.0) {
                return Err(Error::Solver(format!("matrix is not positive definite (pivot {j})")));
            }
            let d = d.sqrt();
            l[j * w + bw] = d;
            for i in (j + 1)..(j + bw + 1).min(n) {
                let ilo = i.saturating_sub(bw).max(jlo);
                let mut s = l[i * w + (j + bw - i)];
                for k in ilo..j {
                    s -= l[i * w + (k + bw - i)] * l[j * w + (k + bw - j)];
                }
                l[i * w + (j + bw - i)] = s / d;
            }
        }
        Ok(BandCholesky { n, bw, l })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i * w + (k + bw - i)] * b[k];
            }
            b[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..(i + bw + 1).min(n) {
                s -= self.l[k * w + (i + bw - k)] * b[k];
            }
            b[i] = s / self.l[i * w + bw];
        }
    }
}

/// `A = L U` (unit lower `L`) stored in a single band.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    a: Vec<f64>,
}

impl BandLu {
    pub fn new(m: &BandMatrix, shift: Option<&[f64]>) -> Result<Self> {
        let (n, kl, ku) = (m.n, m.lower, m.upper);
        let w = kl + ku + 1;
        let mut a = vec![0.0; n * w];
        for (i, row) in m.rows.iter().enumerate() {
            for &(j, v) in row {
                a[i * w + (j + kl - i)] += v;
            }
            if let Some(s) = shift {
                a[i * w + kl] += s[i];
            }
        }
        for k in 0..n {
            let piv = a[k * w + kl];
            if piv == 0.0 || !piv.is_finite() {
                return Err(Error::Solver(format!("zero pivot at row {k}")));
            }
            for i in (k + 1)..(k + kl + 1).min(n) {
                let lik = a[i * w + (k + kl - i)] / piv;
                if lik == 0.0 {
                    continue;
                }
                a[i * w + (k + kl - i)] = lik;
                for j in (k + 1)..(k + ku + 1).min(n) {
                    a[i * w + (j + kl - i)] -= lik * a[k * w + (j + kl - k)];
                }
            }
        }
        Ok(BandLu { n, kl, ku, a })
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.kl + self.ku + 1) + (j + self.kl - i)]
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(self.kl)..i {
                s -= self.at(i, k) * b[k];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in (i + 1)..(i + self.ku + 1).min(n) {
                s -= self.at(i, j) * b[j];
            }
            b[i] = s / self.at(i, i);
        }
    }

    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        // Uᵀ y = b
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(self.ku)..i {
                s -= self.at(k, i) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
        // Lᵀ x = y
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..(i + self.kl + 1).min(n) {
                s -= self.at(k, i) * b[k];
            }
            b[i] = s;
        }
    }
}
