//! Discrete Laplacian, Dirichlet and mixed solves, the Green operator and
//! its norms, the Morel–Oswald constant, principal eigenpairs and interface
//! normal derivatives.

mod banded;
mod eigen;
mod flux;
mod green;
mod operator;

pub use banded::{BandCholesky, BandLu, BandMatrix, Factorization};
pub use eigen::{principal_eigenpair, principal_eigenpair_with, EigenOptions, EigenPair};
pub use flux::{normal_derivative, Side};
pub use green::{
    green_operator_norm, green_operator_norm_with, green_row, morel_oswald_constant,
    morel_oswald_constant_with, torsion, GreenNorm, MorelOswald, MAX_GREEN_ROWS,
};
pub use operator::{solve_dirichlet, DiscreteOperator, LINEAR_TOL};

use crate::error::Result;
use crate::field::FieldFunction;
use crate::geometry::{Grid, NodeClass, SubdomainPartition};

/// Operators on Ω₀ and Ω₁ of a partition, each treating everything outside
/// its own nodes as Dirichlet data.
#[derive(Debug)]
pub struct SubdomainOperators {
    pub inner: DiscreteOperator,
    pub outer: DiscreteOperator,
}

impl SubdomainOperators {
    pub fn new(grid: &Grid, partition: &SubdomainPartition) -> Result<Self> {
        Ok(SubdomainOperators {
            inner: DiscreteOperator::on_nodes(grid, partition.inner_nodes())?,
            outer: DiscreteOperator::on_nodes(grid, partition.outer_nodes())?,
        })
    }
}

/// Nodes of closure(Ω₁): Ω₁, the interface and ∂Ω.
pub fn outer_closure(grid: &Grid, partition: &SubdomainPartition) -> Vec<usize> {
    (0..grid.len()).filter(|&i| partition.class(i) != NodeClass::Inner).collect()
}

/// Nodes of closure(Ω₀): Ω₀ and the interface.
pub fn inner_closure(grid: &Grid, partition: &SubdomainPartition) -> Vec<usize> {
    (0..grid.len())
        .filter(|&i| matches!(partition.class(i), NodeClass::Inner | NodeClass::Interface))
        .collect()
}

/// Boundary data equal to `outer` on ∂Ω and `interface` on closure(Ω₀).
pub fn mixed_data(grid: &Grid, partition: &SubdomainPartition, outer: f64, interface: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|i| match partition.class(i) {
            NodeClass::Boundary => outer,
            NodeClass::Outer => 0.0,
            _ => interface,
        })
        .collect()
}

/// Solves `−Δ_h u = rhs` on Ω₁ with `u = outer_value` on ∂Ω and
/// `u = interface_value` on ∂Ω₀. The result is supported on closure(Ω₁).
pub fn mixed_solve(
    grid: &Grid,
    partition: &SubdomainPartition,
    op_outer: &DiscreteOperator,
    rhs: &FieldFunction,
    outer_value: f64,
    interface_value: f64,
) -> Result<FieldFunction> {
    let data = mixed_data(grid, partition, outer_value, interface_value);
    let mut u = op_outer.solve(rhs.values(), &data)?;
    for i in 0..grid.len() {
        if partition.class(i) == NodeClass::Inner {
            u[i] = 0.0;
        }
    }
    Ok(FieldFunction::from_values(u).with_support(outer_closure(grid, partition)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, SubRegion};
    use crate::weights::WeightField;
    use std::f64::consts::PI;

    fn unit(res: usize) -> Grid {
        Grid::new(Domain::unit_interval(), res).unwrap()
    }

    #[test]
    fn operator_sign_pattern() {
        for g in [unit(16), Grid::new(Domain::unit_square(), 8).unwrap(), Grid::new(Domain::disk(0.0, 0.0, 1.0).unwrap(), 9).unwrap()] {
            let op = DiscreteOperator::new(&g).unwrap();
            for (i, row) in op.matrix().rows.iter().enumerate() {
                for &(j, v) in row {
                    if i == j {
                        assert!(v > 0.0);
                    } else {
                        assert!(v <= 0.0);
                    }
                }
            }
        }
        let disk = Grid::new(Domain::disk(0.0, 0.0, 1.0).unwrap(), 9).unwrap();
        assert!(!DiscreteOperator::new(&disk).unwrap().is_symmetric());
        assert!(DiscreteOperator::new(&unit(8)).unwrap().is_symmetric());
    }

    #[test]
    fn torsion_on_interval() {
        let g = unit(64);
        let op = DiscreteOperator::new(&g).unwrap();
        let u = solve_dirichlet(&op, &FieldFunction::constant(g.len(), 1.0), &FieldFunction::zeros(g.len())).unwrap();
        // the three-point stencil is exact on quadratics
        for (i, p) in g.coords().iter().enumerate() {
            assert!((u.get(i) - p[0] * (1.0 - p[0]) / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn harmonic_segment() {
        let g = unit(20);
        let op = DiscreteOperator::on_nodes(&g, &(15..20).collect::<Vec<_>>()).unwrap();
        let mut data = vec![0.0; g.len()];
        data[14] = 1.0;
        let u = op.solve(&vec![0.0; g.len()], &data).unwrap();
        assert!((u[17] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn manufactured_square_is_second_order() {
        let err = |res| {
            let g = Grid::new(Domain::unit_square(), res).unwrap();
            let op = DiscreteOperator::new(&g).unwrap();
            let rhs = FieldFunction::from_fn(&g, |p| 2.0 * PI * PI * (PI * p[0]).sin() * (PI * p[1]).sin());
            let u = solve_dirichlet(&op, &rhs, &FieldFunction::zeros(g.len())).unwrap();
            g.coords()
                .iter()
                .enumerate()
                .map(|(i, p)| (u.get(i) - (PI * p[0]).sin() * (PI * p[1]).sin()).abs())
                .fold(0.0, f64::max)
        };
        let slope = (err(16) / err(32)).log2();
        assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn disk_poisson_is_second_order() {
        // −Δu = 4 on the unit disk: u = 1 − |x|²
        let err = |res| {
            let g = Grid::new(Domain::disk(0.0, 0.0, 1.0).unwrap(), res).unwrap();
            let op = DiscreteOperator::new(&g).unwrap();
            let u = solve_dirichlet(&op, &FieldFunction::constant(g.len(), 4.0), &FieldFunction::zeros(g.len())).unwrap();
            g.coords()
                .iter()
                .enumerate()
                .map(|(i, p)| (u.get(i) - (1.0 - p[0] * p[0] - p[1] * p[1])).abs())
                .fold(0.0, f64::max)
        };
        // exact for quadratics up to the data on cut nodes
        assert!(err(16) < 1e-10);
        let g = Grid::new(Domain::disk(0.0, 0.0, 1.0).unwrap(), 20).unwrap();
        let op = DiscreteOperator::new(&g).unwrap();
        let rhs = FieldFunction::from_fn(&g, |p| -2.0 * (p[0] + p[1]).exp());
        let exact = |p: [f64; 2]| (p[0] + p[1]).exp();
        let data = FieldFunction::from_fn(&g, exact);
        let u = solve_dirichlet(&op, &rhs, &data).unwrap();
        let e1 = g.coords().iter().enumerate().map(|(i, p)| (u.get(i) - exact(*p)).abs()).fold(0.0, f64::max);
        let g2 = Grid::new(Domain::disk(0.0, 0.0, 1.0).unwrap(), 40).unwrap();
        let op2 = DiscreteOperator::new(&g2).unwrap();
        let rhs2 = FieldFunction::from_fn(&g2, |p| -2.0 * (p[0] + p[1]).exp());
        let u2 = solve_dirichlet(&op2, &rhs2, &FieldFunction::from_fn(&g2, exact)).unwrap();
        let e2 = g2.coords().iter().enumerate().map(|(i, p)| (u2.get(i) - exact(*p)).abs()).fold(0.0, f64::max);
        assert!(e1 / e2 > 3.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn mixed_solve_theta_and_psi() {
        let g = unit(20);
        let part = SubdomainPartition::new(&g, SubRegion::Interval { a: 0.3, b: 0.7 }).unwrap();
        let ops = SubdomainOperators::new(&g, &part).unwrap();
        let theta = mixed_solve(&g, &part, &ops.outer, &FieldFunction::zeros(g.len()), 0.0, 1.0).unwrap();
        let node = g.coords().iter().position(|p| (p[0] - 0.15).abs() < 1e-12).unwrap();
        assert!((theta.get(node) - 0.5).abs() < 1e-14);
        let psi = mixed_solve(&g, &part, &ops.outer, &FieldFunction::constant(g.len(), 1.0), 0.0, 0.0).unwrap();
        assert!(part.outer_nodes().iter().all(|&n| psi.get(n) > 0.0));
        let w = mixed_solve(&g, &part, &ops.outer, &FieldFunction::zeros(g.len()), 0.0, 2.0).unwrap();
        assert!((w.sup_norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn green_norms_on_interval() {
        let g = unit(64);
        let op = DiscreteOperator::new(&g).unwrap();
        let inf = green_operator_norm(&op, f64::INFINITY).unwrap();
        assert!((inf.value - 0.125).abs() < 1e-12);
        let n100 = green_operator_norm(&op, 100.0).unwrap().value;
        let n10 = green_operator_norm(&op, 10.0).unwrap().value;
        assert!(n10 > n100 && n100 > inf.value);
        let mo = morel_oswald_constant(&op, g.delta()).unwrap();
        assert!((mo.c - 1.0).abs() < 1e-10);
        let sub = morel_oswald_constant_with(&op, g.delta(), 10).unwrap();
        assert!(sub.subsampled && sub.c >= mo.c - 1e-14);
    }

    #[test]
    fn eigen_interval_and_scaling() {
        let g = unit(128);
        let op = DiscreteOperator::new(&g).unwrap();
        let m = WeightField::from_fn(&g, |_| 1.0);
        let e = principal_eigenpair(&op, &m).unwrap();
        let exact = 4.0 / g.spacing().powi(2) * (PI * g.spacing() / 2.0).sin().powi(2);
        assert!((e.lambda - exact).abs() < 1e-9 * exact, "{} vs {}", e.lambda, exact);
        assert!((e.phi.sup_norm() - 1.0).abs() < 1e-12);
        assert!(g.interior().iter().all(|&n| e.phi.get(n) > 0.0));
        let e3 = principal_eigenpair(&op, &m.scaled(3.0)).unwrap();
        assert!((e3.lambda - e.lambda / 3.0).abs() < 1e-9 * e.lambda);
        assert!(principal_eigenpair(&op, &m.scaled(-1.0)).is_err());
    }

    #[test]
    fn normal_derivatives() {
        let g = unit(40);
        let part = SubdomainPartition::new(&g, SubRegion::Interval { a: 0.3, b: 0.7 }).unwrap();
        let u: Vec<f64> = g.coords().iter().map(|p| p[0]).collect();
        let d = normal_derivative(&g, &u, &part, Side::FromInner).unwrap();
        assert!((d[0] + 1.0).abs() < 1e-12 && (d[1] - 1.0).abs() < 1e-12);
        let c = vec![3.0; g.len()];
        assert!(normal_derivative(&g, &c, &part, Side::FromOuter).unwrap().iter().all(|v| v.abs() < 1e-12));
    }
}
