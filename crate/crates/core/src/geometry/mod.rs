//! Domains, uniform grids and exact distance fields.
//!
//! Every grid is a subset of a uniform lattice `origin + h·(i, j)`. Interval
//! and rectangle grids use the full lattice; disk grids keep the lattice
//! points inside the disk and add cut nodes where grid lines cross the
//! circle, so that the Laplacian can use unequal arms there.

mod balls;
mod partition;

pub use balls::{enumerate_nonpositive_balls, Ball, ScoredBall};
pub use partition::{InterfaceNode, NodeClass, SubRegion, SubdomainPartition};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::FieldFunction;

/// Point in the plane; 1D problems keep `y = 0`.
pub type Point = [f64; 2];

/// Lattice points closer than this fraction of `h` to the circle are treated
/// as boundary nodes of a disk grid.
const DISK_SNAP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { cx: f64, cy: f64, radius: f64 },
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Domain::Interval { a, b }.validated()
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        Domain::Rectangle { x0, x1, y0, y1 }.validated()
    }

    pub fn disk(cx: f64, cy: f64, radius: f64) -> Result<Self> {
        Domain::Disk { cx, cy, radius }.validated()
    }

    pub fn unit_interval() -> Self {
        Domain::Interval { a: 0.0, b: 1.0 }
    }

    pub fn unit_square() -> Self {
        Domain::Rectangle { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 }
    }

    fn validated(self) -> Result<Self> {
        let ok = match self {
            Domain::Interval { a, b } => a.is_finite() && b.is_finite() && b > a,
            Domain::Rectangle { x0, x1, y0, y1 } => {
                [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x1 > x0 && y1 > y0
            }
            Domain::Disk { cx, cy, radius } => {
                cx.is_finite() && cy.is_finite() && radius.is_finite() && radius > 0.0
            }
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidDomain(format!("{self:?} has no positive measure")))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn measure(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Rectangle { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
            Domain::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }

    /// Exact distance to the boundary for points in the closed domain, 0 outside.
    pub fn distance(&self, p: Point) -> f64 {
        let d = match *self {
            Domain::Interval { a, b } => (p[0] - a).min(b - p[0]),
            Domain::Rectangle { x0, x1, y0, y1 } => {
                (p[0] - x0).min(x1 - p[0]).min(p[1] - y0).min(y1 - p[1])
            }
            Domain::Disk { cx, cy, radius } => radius - (p[0] - cx).hypot(p[1] - cy),
        };
        d.max(0.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Domain::Interval { a, b } => p[0] > a && p[0] < b,
            Domain::Rectangle { x0, x1, y0, y1 } => {
                p[0] > x0 && p[0] < x1 && p[1] > y0 && p[1] < y1
            }
            Domain::Disk { cx, cy, radius } => (p[0] - cx).hypot(p[1] - cy) < radius,
        }
    }

    fn characteristic_length(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Rectangle { x0, x1, .. } => x1 - x0,
            Domain::Disk { radius, .. } => 2.0 * radius,
        }
    }
}

/// One arm of the five-point stencil: the neighbouring node and its distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arm {
    pub node: usize,
    pub length: f64,
}

/// Stencil arms of an interior node, ordered `[+x, -x, +y, -y]` (1D uses the first two).
pub type Arms = [Arm; 4];

#[derive(Clone, Debug)]
pub(crate) struct Lattice {
    pub origin: Point,
    pub nx: usize,
    pub ny: usize,
    pub nodes: Vec<Option<usize>>,
}

impl Lattice {
    pub fn node(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize > self.nx || j as usize > self.ny {
            return None;
        }
        self.nodes[j as usize * (self.nx + 1) + i as usize]
    }
}

/// Uniform grid over a [`Domain`].
#[derive(Clone, Debug)]
pub struct Grid {
    domain: Domain,
    h: f64,
    coords: Vec<Point>,
    interior_flag: Vec<bool>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    volume: Vec<f64>,
    delta: Vec<f64>,
    lattice_index: Vec<Option<[isize; 2]>>,
    lattice: Lattice,
    arms: HashMap<usize, Arms>,
}

impl Grid {
    /// Builds a uniform grid with `h = length / resolution`, where the
    /// length is the interval length, the rectangle's x-extent or the disk
    /// diameter.
    pub fn new(domain: Domain, resolution: usize) -> Result<Self> {
        let domain = domain.validated()?;
        if resolution < 4 {
            return Err(Error::InvalidGrid(format!("resolution {resolution} < 4")));
        }
        let h = domain.characteristic_length() / resolution as f64;
        match domain {
            Domain::Interval { a, .. } => Ok(Self::tensor(domain, h, [a, 0.0], resolution, 0)),
            Domain::Rectangle { x0, y0, y1, .. } => {
                let ny_f = (y1 - y0) / h;
                let ny = ny_f.round() as usize;
                if ny < 2 || (ny_f - ny as f64).abs() > 1e-9 * ny_f.max(1.0) {
                    return Err(Error::InvalidGrid(format!(
                        "rectangle height is not a multiple of h = {h}"
                    )));
                }
                Ok(Self::tensor(domain, h, [x0, y0], resolution, ny))
            }
            Domain::Disk { .. } => Self::disk(domain, h, resolution),
        }
    }

    fn tensor(domain: Domain, h: f64, origin: Point, nx: usize, ny: usize) -> Self {
        let dim = domain.dim();
        let mut coords = Vec::new();
        let mut interior_flag = Vec::new();
        let mut volume = Vec::new();
        let mut lattice_index = Vec::new();
        let mut nodes = Vec::new();
        let weight = |k: usize, n: usize| if k == 0 || k == n { 0.5 * h } else { h };
        for j in 0..=ny {
            for i in 0..=nx {
                let id = coords.len();
                nodes.push(Some(id));
                coords.push([origin[0] + i as f64 * h, origin[1] + j as f64 * h]);
                let inside = i > 0 && i < nx && (dim == 1 || (j > 0 && j < ny));
                interior_flag.push(inside);
                volume.push(if dim == 1 { weight(i, nx) } else { weight(i, nx) * weight(j, ny) });
                lattice_index.push(Some([i as isize, j as isize]));
            }
        }
        let lattice = Lattice { origin, nx, ny, nodes };
        let mut arms = HashMap::new();
        for (id, idx) in lattice_index.iter().enumerate() {
            if !interior_flag[id] {
                continue;
            }
            let [i, j] = idx.unwrap();
            let arm = |di: isize, dj: isize| Arm {
                node: lattice.node(i + di, j + dj).unwrap_or(id),
                length: h,
            };
            arms.insert(id, [arm(1, 0), arm(-1, 0), arm(0, 1), arm(0, -1)]);
        }
        Self::finish(domain, h, coords, interior_flag, volume, lattice_index, lattice, arms)
    }

    fn disk(domain: Domain, h: f64, n: usize) -> Result<Self> {
        let Domain::Disk { cx, cy, radius } = domain else { unreachable!() };
        let origin = [cx - radius, cy - radius];
        let mut coords = Vec::new();
        let mut interior_flag = Vec::new();
        let mut lattice_index = Vec::new();
        let mut nodes = vec![None; (n + 1) * (n + 1)];
        for j in 0..=n {
            for i in 0..=n {
                let p = [origin[0] + i as f64 * h, origin[1] + j as f64 * h];
                let d = radius - (p[0] - cx).hypot(p[1] - cy);
                if d < -DISK_SNAP * h {
                    continue;
                }
                nodes[j * (n + 1) + i] = Some(coords.len());
                coords.push(p);
                interior_flag.push(d > DISK_SNAP * h);
                lattice_index.push(Some([i as isize, j as isize]));
            }
        }
        if !interior_flag.iter().any(|&b| b) {
            return Err(Error::InvalidGrid("disk grid has no interior nodes".into()));
        }
        let lattice = Lattice { origin, nx: n, ny: n, nodes };
        let mut cut_nodes: HashMap<(i64, i64), usize> = HashMap::new();
        let mut arms = HashMap::new();
        let lattice_count = coords.len();
        for id in 0..lattice_count {
            if !interior_flag[id] {
                continue;
            }
            let [i, j] = lattice_index[id].unwrap();
            let p = coords[id];
            let mut node_arms = [Arm { node: id, length: h }; 4];
            for (slot, (di, dj)) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)].iter().enumerate() {
                if let Some(nb) = lattice.node(i + di, j + dj) {
                    node_arms[slot] = Arm { node: nb, length: h };
                    continue;
                }
                // grid line leaves the disk before the next lattice point
                let (ux, uy) = (*di as f64, *dj as f64);
                let (px, py) = (p[0] - cx, p[1] - cy);
                let b = px * ux + py * uy;
                let c = px * px + py * py - radius * radius;
                let t = -b + (b * b - c).sqrt();
                let q = [p[0] + t * ux, p[1] + t * uy];
                let key = ((q[0] / h * 1e9).round() as i64, (q[1] / h * 1e9).round() as i64);
                let nb = *cut_nodes.entry(key).or_insert_with(|| {
                    coords.push(q);
                    interior_flag.push(false);
                    lattice_index.push(None);
                    coords.len() - 1
                });
                node_arms[slot] = Arm { node: nb, length: t };
            }
            arms.insert(id, node_arms);
        }
        let volume = interior_flag.iter().map(|&b| if b { h * h } else { 0.0 }).collect();
        Ok(Self::finish(domain, h, coords, interior_flag, volume, lattice_index, lattice, arms))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        domain: Domain,
        h: f64,
        coords: Vec<Point>,
        interior_flag: Vec<bool>,
        volume: Vec<f64>,
        lattice_index: Vec<Option<[isize; 2]>>,
        lattice: Lattice,
        arms: HashMap<usize, Arms>,
    ) -> Self {
        let interior = (0..coords.len()).filter(|&i| interior_flag[i]).collect();
        let boundary = (0..coords.len()).filter(|&i| !interior_flag[i]).collect();
        let delta = coords
            .iter()
            .zip(&interior_flag)
            .map(|(p, &inside)| if inside { domain.distance(*p) } else { 0.0 })
            .collect();
        Grid {
            domain,
            h,
            coords,
            interior_flag,
            interior,
            boundary,
            volume,
            delta,
            lattice_index,
            lattice,
            arms,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coord(&self, node: usize) -> Point {
        self.coords[node]
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.interior_flag[node]
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn volume(&self, node: usize) -> f64 {
        self.volume[node]
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volume
    }

    /// Nodal distance to `∂Ω`.
    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Stencil arms of an interior node.
    pub fn arms(&self, node: usize) -> Option<&Arms> {
        self.arms.get(&node)
    }

    pub(crate) fn lattice_index(&self, node: usize) -> Option<[isize; 2]> {
        self.lattice_index[node]
    }

    /// Node at lattice offset `(di, dj)` from `node`, if it exists.
    pub(crate) fn lattice_step(&self, node: usize, di: isize, dj: isize) -> Option<usize> {
        let [i, j] = self.lattice_index[node]?;
        self.lattice.node(i + di, j + dj)
    }

    /// Lattice index of the point nearest to `p`.
    pub(crate) fn nearest_lattice(&self, p: Point) -> [isize; 2] {
        let o = self.lattice.origin;
        [((p[0] - o[0]) / self.h).round() as isize, ((p[1] - o[1]) / self.h).round() as isize]
    }

    pub(crate) fn lattice_coord(&self, i: isize, j: isize) -> Point {
        let o = self.lattice.origin;
        [o[0] + i as f64 * self.h, o[1] + j as f64 * self.h]
    }
}

/// Exact distance field of the grid's domain (0 on boundary nodes).
pub fn distance_field(grid: &Grid) -> FieldFunction {
    FieldFunction::from_values(grid.delta().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_resolution_four() {
        let g = Grid::new(Domain::unit_interval(), 4).unwrap();
        let xs: Vec<f64> = g.coords().iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.interior().len(), 3);
        assert_eq!(g.delta()[1], 0.25);
        assert_eq!(g.volumes().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn square_resolution_four() {
        let g = Grid::new(Domain::unit_square(), 4).unwrap();
        assert_eq!(g.interior().len(), 9);
        assert!((g.volumes().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // node (0.5, 0.25)
        let id = g.coords().iter().position(|p| *p == [0.5, 0.25]).unwrap();
        assert_eq!(g.delta()[id], 0.25);
    }

    #[test]
    fn disk_h_half_counts_lattice_points() {
        let g = Grid::new(Domain::disk(0.0, 0.0, 1.0).unwrap(), 4).unwrap();
        // enumeration oracle: lattice points 0.5·(i, j) strictly inside the unit circle
        let mut count = 0;
        for i in -4i32..=4 {
            for j in -4i32..=4 {
                let r2 = (i * i + j * j) as f64 * 0.25;
                if r2 < 1.0 - 1e-12 {
                    count += 1;
                }
            }
        }
        assert_eq!(g.interior().len(), count);
        let origin = g.coords().iter().position(|p| *p == [0.0, 0.0]).unwrap();
        assert_eq!(g.delta()[origin], 1.0);
        for &b in g.boundary() {
            assert_eq!(g.delta()[b], 0.0);
            let p = g.coord(b);
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn disk_volume_converges() {
        let g = Grid::new(Domain::disk(0.0, 0.0, 1.0).unwrap(), 64).unwrap();
        let vol: f64 = g.volumes().iter().sum();
        assert!((vol - std::f64::consts::PI).abs() < 4.0 * g.spacing() * 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn cut_arms_are_short() {
        let g = Grid::new(Domain::disk(0.0, 0.0, 1.0).unwrap(), 10).unwrap();
        for &i in g.interior() {
            for arm in g.arms(i).unwrap() {
                assert!(arm.length > 0.0 && arm.length <= g.spacing() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(Domain::unit_interval(), 3).is_err());
        assert!(Domain::interval(1.0, 1.0).is_err());
        assert!(Domain::disk(0.0, 0.0, 0.0).is_err());
        assert!(Grid::new(Domain::rectangle(0.0, 1.0, 0.0, 0.3).unwrap(), 4).is_err());
    }

    #[test]
    fn distance_is_resolution_independent() {
        let coarse = Grid::new(Domain::unit_square(), 8).unwrap();
        let fine = Grid::new(Domain::unit_square(), 16).unwrap();
        for (k, p) in coarse.coords().iter().enumerate() {
            let f = fine.coords().iter().position(|q| q == p).unwrap();
            assert_eq!(coarse.delta()[k], fine.delta()[f]);
        }
    }
}
