use crate::error::{Error, Result};
use crate::geometry::{Grid, SubdomainPartition};

/// Side whose nodes feed the one-sided difference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    FromInner,
    FromOuter,
}

/// Second-order one-sided `∂u/∂ν` at every interface node, `ν` the outward
/// normal of Ω₀, using the interface node and two nodes on the given side.
pub fn normal_derivative(grid: &Grid, u: &[f64], partition: &SubdomainPartition, side: Side) -> Result<Vec<f64>> {
    let h = grid.spacing();
    partition
        .interface()
        .iter()
        .map(|iface| {
            let s = match side {
                Side::FromInner => -1,
                Side::FromOuter => 1,
            };
            let [di, dj] = iface.step;
            let spacing = h * ((di * di + dj * dj) as f64).sqrt();
            let near = grid.lattice_step(iface.node, s * di, s * dj);
            let far = grid.lattice_step(iface.node, 2 * s * di, 2 * s * dj);
            let (Some(near), Some(far)) = (near, far) else {
                return Err(Error::InvalidPartition(format!(
                    "flux stencil leaves the grid at interface node {}",
                    iface.node
                )));
            };
            let (u0, u1, u2) = (u[iface.node], u[near], u[far]);
            Ok(match side {
                Side::FromInner => (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * spacing),
                Side::FromOuter => (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * spacing),
            })
        })
        .collect()
}
