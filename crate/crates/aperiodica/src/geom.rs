//! Small geometric helpers: regions, ball volumes, neighbor grids.

use std::collections::HashMap;

/// Sampling region, centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Closed ball (interval in 1D) of the given radius.
    Ball { radius: f64 },
    /// Closed box with per-axis half-widths.
    Box { half_widths: Vec<f64> },
}

impl Region {
    pub fn ball(radius: f64) -> Self {
        Region::Ball { radius }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Ball { radius } => norm(x) <= *radius,
            Region::Box { half_widths } => x
                .iter()
                .zip(half_widths)
                .all(|(xi, hi)| xi.abs() <= *hi),
        }
    }

    /// Distance from `x` to the region boundary (positive inside).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Region::Ball { radius } => radius - norm(x),
            Region::Box { half_widths } => x
                .iter()
                .zip(half_widths)
                .map(|(xi, hi)| hi - xi.abs())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Radius of the largest centered ball contained in the region.
    pub fn inradius(&self) -> f64 {
        match self {
            Region::Ball { radius } => *radius,
            Region::Box { half_widths } => {
                half_widths.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, Region::Ball { .. })
    }
}

/// Lebesgue measure of the ball of radius `s` in dimension `dim` (1..=3).
pub fn ball_volume(dim: usize, s: f64) -> f64 {
    match dim {
        1 => 2.0 * s,
        2 => std::f64::consts::PI * s * s,
        3 => 4.0 / 3.0 * std::f64::consts::PI * s * s * s,
        _ => panic!("ball_volume: unsupported dimension {dim}"),
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Uniform bucket grid over up to three dimensions for fixed-radius
/// neighbor queries and pair enumeration.
pub struct NeighborGrid {
    cell: f64,
    dim: usize,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl NeighborGrid {
    pub fn build(points: &[Vec<f64>], cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite());
        let dim = points.first().map_or(1, Vec::len);
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(p, cell)).or_default().push(i);
        }
        NeighborGrid { cell, dim, buckets }
    }

    fn key(p: &[f64], cell: f64) -> [i64; 3] {
        let mut k = [0i64; 3];
        for (j, x) in p.iter().enumerate() {
            k[j] = (x / cell).floor() as i64;
        }
        k
    }

    /// Visit indices of all points within `r` of `x` (inclusive).
    pub fn for_each_within<F: FnMut(usize)>(
        &self,
        points: &[Vec<f64>],
        x: &[f64],
        r: f64,
        mut f: F,
    ) {
        let reach = (r / self.cell).ceil() as i64;
        let center = Self::key(x, self.cell);
        let range = |d: usize| {
            if d < self.dim {
                -reach..=reach
            } else {
                0..=0
            }
        };
        for di in range(0) {
            for dj in range(1) {
                for dk in range(2) {
                    let key = [center[0] + di, center[1] + dj, center[2] + dk];
                    if let Some(bucket) = self.buckets.get(&key) {
                        for &i in bucket {
                            if dist(&points[i], x) <= r {
                                f(i);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Indices of all points within `r` of `x`, unordered.
    pub fn within(&self, points: &[Vec<f64>], x: &[f64], r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(points, x, r, |i| out.push(i));
        out
    }
}

/// Minimum pairwise distance of a point cloud; `+inf` for fewer than two
/// points. Uses an expanding-ring grid search so typical inputs stay
/// near-linear.
pub fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    if points.len() < 2 {
        return f64::INFINITY;
    }
    let dim = points[0].len();
    if dim == 1 {
        let mut xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    }
    // Heuristic cell from the sampled extent; refined by expanding rings.
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in points {
        for j in 0..dim {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    let extent: f64 = (0..dim).map(|j| (hi[j] - lo[j]).max(1e-300)).product();
    let cell = (extent / points.len() as f64).powf(1.0 / dim as f64).max(1e-12);
    let grid = NeighborGrid::build(points, cell);
    let mut best = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let mut r = cell;
        loop {
            let mut found = f64::INFINITY;
            grid.for_each_within(points, p, r, |j| {
                if j != i {
                    found = found.min(dist(p, &points[j]));
                }
            });
            if found.is_finite() {
                best = best.min(found);
                break;
            }
            r *= 2.0;
            if r > 4.0 * extent.powf(1.0 / dim as f64) + cell {
                break; // isolated point; other pairs set the minimum
            }
        }
    }
    best
}
