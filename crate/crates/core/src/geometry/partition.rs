use super::{Grid, Point};
use crate::error::{Error, Result};

/// Axis-aligned sub-interval or sub-rectangle, used for Ω₀ and for the
/// convex set of the integral nonexistence criterion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SubRegion {
    Interval { a: f64, b: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl SubRegion {
    pub fn dim(&self) -> usize {
        match self {
            SubRegion::Interval { .. } => 1,
            SubRegion::Rectangle { .. } => 2,
        }
    }

    pub fn measure(&self) -> f64 {
        match *self {
            SubRegion::Interval { a, b } => b - a,
            SubRegion::Rectangle { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
        }
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            SubRegion::Interval { a, b } => ([a, 0.0], [b, 0.0]),
            SubRegion::Rectangle { x0, x1, y0, y1 } => ([x0, y0], [x1, y1]),
        }
    }

    /// Closed-set membership with a relative tolerance.
    pub fn contains_closed(&self, p: Point) -> bool {
        let (lo, hi) = self.bounds();
        let tol = 1e-12 * (1.0 + hi[0].abs().max(lo[0].abs()));
        (0..self.dim()).all(|k| p[k] >= lo[k] - tol && p[k] <= hi[k] + tol)
    }

    /// Distance from an inside point to the region boundary (0 outside).
    pub fn inner_distance(&self, p: Point) -> f64 {
        let (lo, hi) = self.bounds();
        (0..self.dim())
            .map(|k| (p[k] - lo[k]).min(hi[k] - p[k]))
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    /// Euclidean distance from a point to the closed region (0 inside).
    pub fn outer_distance(&self, p: Point) -> f64 {
        let (lo, hi) = self.bounds();
        (0..self.dim())
            .map(|k| (lo[k] - p[k]).max(p[k] - hi[k]).max(0.0).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    /// Node of ∂Ω.
    Boundary,
    /// Interior node of Ω₀.
    Inner,
    /// Interior node of Ω₁ = Ω − closure(Ω₀).
    Outer,
    /// Node on ∂Ω₀.
    Interface,
}

/// Node on ∂Ω₀ with the outward unit normal of Ω₀ and the matching lattice step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceNode {
    pub node: usize,
    pub normal: [f64; 2],
    pub step: [isize; 2],
}

/// Split of the grid interior into Ω₀, Ω₁ and the interface ∂Ω₀.
#[derive(Clone, Debug)]
pub struct SubdomainPartition {
    requested: SubRegion,
    region: SubRegion,
    class: Vec<NodeClass>,
    inner: Vec<usize>,
    outer: Vec<usize>,
    interface: Vec<InterfaceNode>,
    delta_inner: Vec<f64>,
    delta_outer: Vec<f64>,
}

impl SubdomainPartition {
    /// Classifies the grid nodes against Ω₀. Ω₀ is snapped to the nearest
    /// grid lines; it must stay at least `2h` away from `∂Ω` and be at least
    /// `4h` wide so both one-sided flux stencils fit.
    pub fn new(grid: &Grid, omega0: SubRegion) -> Result<Self> {
        let dim = grid.dim();
        if omega0.dim() != dim {
            return Err(Error::InvalidPartition(format!(
                "Ω₀ dimension {} does not match domain dimension {dim}",
                omega0.dim()
            )));
        }
        let (lo, hi) = omega0.bounds();
        if !(0..dim).all(|k| hi[k] > lo[k]) {
            return Err(Error::InvalidPartition("Ω₀ is empty".into()));
        }
        // closure(Ω₀) must lie inside the open domain
        let requested_corners = corners(lo, hi, dim);
        if requested_corners.iter().any(|&c| !grid.domain().contains(c)) {
            return Err(Error::InvalidPartition(format!(
                "Ω₀ {omega0:?} touches or exits ∂Ω"
            )));
        }
        let ilo = grid.nearest_lattice(lo);
        let ihi = grid.nearest_lattice(hi);
        for k in 0..dim {
            if ihi[k] - ilo[k] < 4 {
                return Err(Error::InvalidPartition(
                    "Ω₀ must span at least 4 grid cells in every direction".into(),
                ));
            }
        }
        let slo = grid.lattice_coord(ilo[0], ilo[1]);
        let shi = grid.lattice_coord(ihi[0], ihi[1]);
        let region = match omega0 {
            SubRegion::Interval { .. } => SubRegion::Interval { a: slo[0], b: shi[0] },
            SubRegion::Rectangle { .. } => {
                SubRegion::Rectangle { x0: slo[0], x1: shi[0], y0: slo[1], y1: shi[1] }
            }
        };
        let h = grid.spacing();
        let clearance = corners(slo, shi, dim)
            .iter()
            .map(|&c| grid.domain().distance(c))
            .fold(f64::INFINITY, f64::min);
        if clearance < 2.0 * h * (1.0 - 1e-9) {
            return Err(Error::InvalidPartition(format!(
                "clearance {clearance:.3e} between Ω₀ and ∂Ω is below 2h = {:.3e}",
                2.0 * h
            )));
        }

        let n = grid.len();
        let mut class = vec![NodeClass::Boundary; n];
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        let mut interface = Vec::new();
        let mut delta_inner = vec![0.0; n];
        let mut delta_outer = vec![0.0; n];
        for &node in grid.interior() {
            let Some([i, j]) = grid.lattice_index(node) else { continue };
            let idx = [i, j];
            let inside = (0..dim).all(|k| idx[k] >= ilo[k] && idx[k] <= ihi[k]);
            let p = grid.coord(node);
            if !inside {
                class[node] = NodeClass::Outer;
                outer.push(node);
                delta_outer[node] =
                    grid.domain().distance(p).min(region.outer_distance(p));
                continue;
            }
            let mut step = [0isize; 2];
            for k in 0..dim {
                if idx[k] == ilo[k] {
                    step[k] = -1;
                } else if idx[k] == ihi[k] {
                    step[k] = 1;
                }
            }
            if step == [0, 0] {
                class[node] = NodeClass::Inner;
                inner.push(node);
                delta_inner[node] = region.inner_distance(p);
            } else {
                class[node] = NodeClass::Interface;
                let norm = ((step[0] * step[0] + step[1] * step[1]) as f64).sqrt();
                let normal = [step[0] as f64 / norm, step[1] as f64 / norm];
                for k in 1..=2 {
                    let out = grid.lattice_step(node, k * step[0], k * step[1]);
                    if !out.is_some_and(|o| grid.is_interior(o)) {
                        return Err(Error::InvalidPartition(
                            "clearance below 2h along an interface normal".into(),
                        ));
                    }
                }
                interface.push(InterfaceNode { node, normal, step });
            }
        }
        if outer.is_empty() {
            return Err(Error::InvalidPartition("Ω₁ has no interior nodes".into()));
        }
        Ok(SubdomainPartition {
            requested: omega0,
            region,
            class,
            inner,
            outer,
            interface,
            delta_inner,
            delta_outer,
        })
    }

    /// Ω₀ after snapping to grid lines.
    pub fn region(&self) -> SubRegion {
        self.region
    }

    pub fn requested_region(&self) -> SubRegion {
        self.requested
    }

    /// Whether snapping moved Ω₀ by more than round-off.
    pub fn was_snapped(&self) -> bool {
        let (a, b) = (self.region.bounds(), self.requested.bounds());
        let scale = 1e-9 * (1.0 + self.region.measure().abs());
        (0..self.region.dim()).any(|k| (a.0[k] - b.0[k]).abs() > scale || (a.1[k] - b.1[k]).abs() > scale)
    }

    pub fn class(&self, node: usize) -> NodeClass {
        self.class[node]
    }

    /// Interior nodes of Ω₀.
    pub fn inner_nodes(&self) -> &[usize] {
        &self.inner
    }

    /// Interior nodes of Ω₁.
    pub fn outer_nodes(&self) -> &[usize] {
        &self.outer
    }

    pub fn interface(&self) -> &[InterfaceNode] {
        &self.interface
    }

    pub fn interface_nodes(&self) -> Vec<usize> {
        self.interface.iter().map(|i| i.node).collect()
    }

    /// Distance to ∂Ω₀ on Ω₀ nodes (0 elsewhere).
    pub fn delta_inner(&self) -> &[f64] {
        &self.delta_inner
    }

    /// Distance to ∂Ω₁ on Ω₁ nodes (0 elsewhere).
    pub fn delta_outer(&self) -> &[f64] {
        &self.delta_outer
    }
}

fn corners(lo: [f64; 2], hi: [f64; 2], dim: usize) -> Vec<Point> {
    if dim == 1 {
        vec![[lo[0], 0.0], [hi[0], 0.0]]
    } else {
        vec![[lo[0], lo[1]], [hi[0], lo[1]], [lo[0], hi[1]], [hi[0], hi[1]]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;

    #[test]
    fn interval_partition() {
        let g = Grid::new(Domain::unit_interval(), 20).unwrap();
        let p = SubdomainPartition::new(&g, SubRegion::Interval { a: 0.3, b: 0.7 }).unwrap();
        let iface: Vec<(f64, f64)> = p
            .interface()
            .iter()
            .map(|i| (g.coord(i.node)[0], i.normal[0]))
            .collect();
        assert_eq!(iface.len(), 2);
        assert!((iface[0].0 - 0.3).abs() < 1e-12 && iface[0].1 == -1.0);
        assert!((iface[1].0 - 0.7).abs() < 1e-12 && iface[1].1 == 1.0);
        assert_eq!(
            p.inner_nodes().len() + p.outer_nodes().len() + p.interface().len(),
            g.interior().len()
        );
        assert!(!p.was_snapped());
        for &o in p.outer_nodes() {
            let x = g.coord(o)[0];
            let expect = if x < 0.5 { x.min(0.3 - x) } else { (x - 0.7).min(1.0 - x) };
            assert!((p.delta_outer()[o] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn nested_rectangles() {
        let g = Grid::new(Domain::unit_square(), 16).unwrap();
        let region = SubRegion::Rectangle { x0: 0.25, x1: 0.75, y0: 0.25, y1: 0.75 };
        let p = SubdomainPartition::new(&g, region).unwrap();
        // 4 sides of 9 nodes sharing 4 corners
        assert_eq!(p.interface().len(), 32);
        assert_eq!(p.inner_nodes().len(), 49);
        assert_eq!(
            p.inner_nodes().len() + p.outer_nodes().len() + p.interface().len(),
            g.interior().len()
        );
        let corners = p.interface().iter().filter(|i| i.step[0] != 0 && i.step[1] != 0).count();
        assert_eq!(corners, 4);
    }

    #[test]
    fn touching_boundary_is_rejected() {
        let g = Grid::new(Domain::unit_interval(), 20).unwrap();
        assert!(SubdomainPartition::new(&g, SubRegion::Interval { a: 0.0, b: 0.7 }).is_err());
        // 1h clearance
        assert!(SubdomainPartition::new(&g, SubRegion::Interval { a: 0.05, b: 0.7 }).is_err());
    }

    #[test]
    fn sub_rectangle_in_disk() {
        let g = Grid::new(Domain::disk(0.0, 0.0, 1.0).unwrap(), 32).unwrap();
        let region = SubRegion::Rectangle { x0: -0.25, x1: 0.25, y0: -0.25, y1: 0.25 };
        let p = SubdomainPartition::new(&g, region).unwrap();
        assert_eq!(
            p.inner_nodes().len() + p.outer_nodes().len() + p.interface().len(),
            g.interior().len()
        );
    }

    #[test]
    fn snapping_is_recorded() {
        let g = Grid::new(Domain::unit_interval(), 256).unwrap();
        let p = SubdomainPartition::new(&g, SubRegion::Interval { a: 0.3, b: 0.7 }).unwrap();
        assert!(p.was_snapped());
        let SubRegion::Interval { a, b } = p.region() else { panic!() };
        assert_eq!(a, 77.0 / 256.0);
        assert_eq!(b, 179.0 / 256.0);
    }
}
