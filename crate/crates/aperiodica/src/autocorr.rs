//! Finite-volume autocorrelation estimators and the model-set overlap
//! oracle.
//!
//! Two estimators of the autocorrelation coefficients are provided. The
//! pairs-in-ball estimator restricts both points of a pair to the
//! averaging ball and is exactly symmetric and positive definite; the
//! anchored estimator counts `x` in the ball with `x + z` anywhere in the
//! sample, matching the limit coefficient `c_z` directly and converging
//! faster. Signs and normalizations follow the crate-level conventions.

use crate::cps::CutProjectScheme;
use crate::error::{Error, Result};
use crate::geom::{self, ball_volume, NeighborGrid};
use crate::pointset::PointSet;

/// Which finite-volume estimator a comb was built with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// `weight(z) = #{(x, y) : x, y in B_n, x - y = z} / vol(B_n)`.
    PairsInBall,
    /// `weight(z) = #{x in B_n : x + z in sample} / vol(B_n)` (the
    /// coefficient `c_z`). Default.
    Anchored,
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Estimator::PairsInBall => write!(f, "pairs-in-ball"),
            Estimator::Anchored => write!(f, "anchored"),
        }
    }
}

/// Finitely supported weighted Dirac comb: an autocorrelation
/// approximant.
#[derive(Debug, Clone)]
pub struct WeightedComb {
    /// Difference vectors, sorted lexicographically.
    pub support: Vec<Vec<f64>>,
    /// Nonnegative weights, parallel to `support`; the weight at 0 is the
    /// point density in the averaging ball.
    pub weights: Vec<f64>,
    /// Exact label differences when the sample is labeled.
    pub labels: Option<Vec<Vec<i64>>>,
    /// `vol(B_n)` used for normalization.
    pub normalization_volume: f64,
    pub estimator: Estimator,
    /// Averaging radius `n`.
    pub n: f64,
    /// Support cutoff `s_max`.
    pub s_max: f64,
}

impl WeightedComb {
    /// Weight of the class containing `z` (within `tol`), or 0.
    pub fn weight_at(&self, z: &[f64], tol: f64) -> f64 {
        self.support
            .iter()
            .position(|v| geom::dist(v, z) <= tol)
            .map_or(0.0, |i| self.weights[i])
    }
}

struct CombAccumulator<'a> {
    p: &'a PointSet,
    quantum: f64,
    index: std::collections::HashMap<Vec<i64>, usize>,
    vectors: Vec<Vec<f64>>,
    labels: Vec<Vec<i64>>,
    counts: Vec<usize>,
}

impl<'a> CombAccumulator<'a> {
    fn new(p: &'a PointSet) -> Self {
        CombAccumulator {
            p,
            quantum: p.quantum(),
            index: std::collections::HashMap::new(),
            vectors: Vec::new(),
            labels: Vec::new(),
            counts: Vec::new(),
        }
    }

    /// Record the ordered pair with difference `points[i] - points[j]`.
    fn add(&mut self, i: usize, j: usize) {
        let z = geom::sub(&self.p.points()[i], &self.p.points()[j]);
        let key: Vec<i64> = match self.p.labels() {
            Some(ls) => ls[i].iter().zip(&ls[j]).map(|(a, b)| a - b).collect(),
            None => z.iter().map(|x| (x / self.quantum).round() as i64).collect(),
        };
        match self.index.get(&key) {
            Some(&slot) => self.counts[slot] += 1,
            None => {
                self.index.insert(key.clone(), self.vectors.len());
                self.vectors.push(z);
                self.labels.push(key);
                self.counts.push(1);
            }
        }
    }

    fn finish(self, volume: f64, estimator: Estimator, n: f64, s_max: f64) -> WeightedComb {
        let labeled = self.p.labels().is_some();
        let mut order: Vec<usize> = (0..self.vectors.len()).collect();
        let vectors = self.vectors;
        order.sort_by(|&a, &b| {
            vectors[a]
                .iter()
                .zip(&vectors[b])
                .map(|(x, y)| x.partial_cmp(y).unwrap())
                .find(|o| *o != std::cmp::Ordering::Equal)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        WeightedComb {
            support: order.iter().map(|&i| vectors[i].clone()).collect(),
            weights: order.iter().map(|&i| self.counts[i] as f64 / volume).collect(),
            labels: labeled
                .then(|| order.iter().map(|&i| self.labels[i].clone()).collect()),
            normalization_volume: volume,
            estimator,
            n,
            s_max,
        }
    }
}

/// Autocorrelation approximant over the centered ball `B_n`, restricted to
/// differences `|z| <= s_max`.
///
/// Preconditions: `n <= region` for pairs-in-ball; `n + s_max <= region`
/// for anchored (so no anchor can point outside the sampled region).
pub fn autocorr(
    p: &PointSet,
    n: f64,
    s_max: f64,
    estimator: Estimator,
) -> Result<WeightedComb> {
    let inradius = p.region().inradius();
    let needed = match estimator {
        Estimator::PairsInBall => n,
        Estimator::Anchored => n + s_max,
    };
    if needed > inradius + 1e-12 {
        return Err(Error::RegionTooSmall(format!(
            "estimator needs radius {needed}, region provides {inradius}"
        )));
    }
    let volume = ball_volume(p.dim(), n);
    let grid = NeighborGrid::build(p.points(), s_max.max(1e-9));
    let mut acc = CombAccumulator::new(p);
    for i in 0..p.len() {
        let x = &p.points()[i];
        if geom::norm(x) > n {
            continue;
        }
        grid.for_each_within(p.points(), x, s_max, |j| match estimator {
            Estimator::PairsInBall => {
                // pair (x, y) contributes delta_{x - y}; both in the ball
                if geom::norm(&p.points()[j]) <= n {
                    acc.add(i, j);
                }
            }
            Estimator::Anchored => {
                // anchor x in the ball, x + z anywhere in the sample
                acc.add(j, i);
            }
        });
    }
    Ok(acc.finish(volume, estimator, n, s_max))
}

/// The estimate sequence `(n, c_z(n))` for a fixed difference `z`; zeros
/// when `z` is not realized in the sample (a valid limit off the
/// difference set).
pub fn autocorr_convergence(
    p: &PointSet,
    n_list: &[f64],
    z: &[f64],
    estimator: Estimator,
) -> Result<Vec<(f64, f64)>> {
    let z_norm = geom::norm(z);
    let tol = p.quantum().max(1e-12);
    let grid = NeighborGrid::build(p.points(), z_norm.max(1e-9));
    let inradius = p.region().inradius();
    n_list
        .iter()
        .map(|&n| {
            let needed = match estimator {
                Estimator::PairsInBall => n,
                Estimator::Anchored => n + z_norm,
            };
            if needed > inradius + 1e-12 {
                return Err(Error::RegionTooSmall(format!(
                    "n = {n} needs radius {needed}, region provides {inradius}"
                )));
            }
            let mut count = 0usize;
            for x in p.points() {
                if geom::norm(x) > n {
                    continue;
                }
                let target: Vec<f64> = x.iter().zip(z).map(|(a, b)| a + b).collect();
                let mut hit = false;
                grid.for_each_within(p.points(), &target, tol, |j| {
                    hit |= match estimator {
                        Estimator::PairsInBall => geom::norm(&p.points()[j]) <= n,
                        Estimator::Anchored => true,
                    };
                });
                count += usize::from(hit);
            }
            Ok((n, count as f64 / ball_volume(p.dim(), n)))
        })
        .collect()
}

/// Exact limiting coefficient for a regular model set:
/// `c_z = vol(W ∩ (W - z*)) / covolume`, with `z*` the internal image of
/// the lattice label.
pub fn overlap_oracle(cps: &CutProjectScheme, z_label: &[i64]) -> f64 {
    let (_, z_star) = cps.star_map(z_label);
    cps.window().overlap_volume(&z_star) / cps.covolume()
}
