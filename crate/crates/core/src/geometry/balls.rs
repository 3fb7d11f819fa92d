use super::{Grid, Point};
use crate::weights::WeightField;

/// Open ball `B_R(x₀)` contained in Ω.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn contains_closed(&self, p: Point) -> bool {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1]) <= self.radius * (1.0 + 1e-12)
    }
}

/// Ball inside the non-positivity set of `m` with `m_R = min m⁻` over its
/// nodes and score `m_R·R²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredBall {
    pub ball: Ball,
    pub center_node: usize,
    /// Radius in units of `h`.
    pub radius_steps: usize,
    /// Nodes of the closed ball, in ascending order.
    pub nodes: Vec<usize>,
    pub m_r: f64,
    pub score: f64,
}

/// Enumerates balls centered at interior lattice nodes with radii `h, 2h, …`
/// up to `δ_Ω(center)`, keeping those with `m ≤ 0` at every node of the
/// closed ball. Sorted by score, descending.
pub fn enumerate_nonpositive_balls(grid: &Grid, m: &WeightField) -> Vec<ScoredBall> {
    let h = grid.spacing();
    let values = m.values();
    let kmax_global = grid
        .interior()
        .iter()
        .map(|&c| (grid.delta()[c] / h + 1e-9).floor() as usize)
        .max()
        .unwrap_or(0);
    let offsets = offsets_by_radius(grid.dim(), kmax_global);

    let mut balls = Vec::new();
    for &center in grid.interior() {
        if values[center] > 0.0 {
            continue;
        }
        let Some(_) = grid.lattice_index(center) else { continue };
        let kmax = (grid.delta()[center] / h + 1e-9).floor() as usize;
        let mut m_r = -values[center];
        let mut nodes = vec![center];
        'radius: for (k, shell) in offsets.iter().enumerate().skip(1).take(kmax) {
            for &[di, dj] in shell {
                let Some(node) = grid.lattice_step(center, di, dj) else { continue };
                if values[node] > 0.0 {
                    break 'radius;
                }
                m_r = m_r.min(-values[node]);
                nodes.push(node);
            }
            let radius = k as f64 * h;
            let mut sorted = nodes.clone();
            sorted.sort_unstable();
            balls.push(ScoredBall {
                ball: Ball { center: grid.coord(center), radius },
                center_node: center,
                radius_steps: k,
                nodes: sorted,
                m_r,
                score: m_r * radius * radius,
            });
        }
    }
    balls.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.center_node.cmp(&b.center_node))
            .then(a.radius_steps.cmp(&b.radius_steps))
    });
    balls
}

/// Lattice offsets grouped by the smallest integer radius containing them.
fn offsets_by_radius(dim: usize, kmax: usize) -> Vec<Vec<[isize; 2]>> {
    let mut shells = vec![Vec::new(); kmax + 1];
    let k = kmax as isize;
    for dj in if dim == 1 { 0..=0 } else { -k..=k } {
        for di in -k..=k {
            let d2 = (di * di + dj * dj) as usize;
            let r = (d2 as f64).sqrt().ceil() as usize;
            if r <= kmax && d2 > 0 {
                shells[r].push([di, dj]);
            }
        }
    }
    for shell in &mut shells {
        shell.sort_by_key(|o| (o[1], o[0]));
    }
    shells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::weights::WeightField;

    #[test]
    fn shells_partition_disk() {
        let shells = offsets_by_radius(2, 5);
        let total: usize = shells.iter().map(|s| s.len()).sum();
        let mut brute = 0;
        for i in -5i32..=5 {
            for j in -5i32..=5 {
                if i * i + j * j <= 25 && (i, j) != (0, 0) {
                    brute += 1;
                }
            }
        }
        assert_eq!(total, brute);
        assert!(shells[1].contains(&[1, 0]) && shells[2].contains(&[1, 1]));
    }

    #[test]
    fn positive_weight_has_no_balls() {
        let g = Grid::new(Domain::unit_interval(), 32).unwrap();
        let m = WeightField::from_fn(&g, |_| 1.0);
        assert!(enumerate_nonpositive_balls(&g, &m).is_empty());
    }

    #[test]
    fn linear_weight_ball_score() {
        // continuum optimum: (0.5 − 2R)R² at R = 1/6, score 1/216
        let g = Grid::new(Domain::unit_interval(), 240).unwrap();
        let m = WeightField::from_fn(&g, |p| p[0] - 0.5);
        let balls = enumerate_nonpositive_balls(&g, &m);
        let best = &balls[0];
        assert!((best.score - 1.0 / 216.0).abs() < 1e-4);
        assert!((best.ball.radius - 1.0 / 6.0).abs() < 2.0 * g.spacing());
        for b in &balls {
            assert!(b.nodes.iter().all(|&n| m.values()[n] <= 0.0));
        }
    }

    #[test]
    fn constant_negative_on_disk() {
        let g = Grid::new(Domain::disk(0.0, 0.0, 1.0).unwrap(), 20).unwrap();
        let m = WeightField::from_fn(&g, |_| -1.0);
        let best = &enumerate_nonpositive_balls(&g, &m)[0];
        assert_eq!(best.ball.center, [0.0, 0.0]);
        assert!((best.score - 1.0).abs() < 1e-12);
    }
}
