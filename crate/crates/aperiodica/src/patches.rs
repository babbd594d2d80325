//! Centered ball patches, the finite-local-complexity census `N(S)`,
//! locator sets and frequencies, repetitivity, and patch-counting entropy.
//!
//! A patch is the local configuration `(Lambda - x) ∩ B_S` around a point
//! `x`; it always contains the zero offset. Patch equality follows the
//! crate-level exactness policy: label differences when the sample carries
//! labels, quantized offsets otherwise.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{self, ball_volume, NeighborGrid};
use crate::pointset::PointSet;

/// Canonical identity of a patch under the chosen key policy.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatchKey {
    /// Sorted list of exact label differences.
    Labels(Vec<Vec<i64>>),
    /// Sorted list of offsets quantized at the sample quantum.
    Quantized(Vec<Vec<i64>>),
}

/// A canonicalized local configuration.
#[derive(Debug, Clone)]
pub struct Patch {
    /// Ball radius of the patch.
    pub radius: f64,
    /// Offsets of the configuration, lexicographically sorted; contains 0.
    pub offsets: Vec<Vec<f64>>,
    /// Census key (see [`PatchKey`]).
    pub key: PatchKey,
}

/// One equivalence class in a census.
#[derive(Debug, Clone)]
pub struct PatchClass {
    pub representative: Patch,
    pub count: usize,
    /// Indices (into the point set) of the centers where the class occurs.
    pub centers: Vec<usize>,
}

/// Census of all patches of radius `S` over the interior centers of a
/// sample; the number of classes is the complexity `N(S)`.
#[derive(Debug, Clone)]
pub struct PatchCensus {
    pub radius: f64,
    /// Classes sorted by decreasing count (ties broken by first center).
    pub classes: Vec<PatchClass>,
    pub centers_considered: usize,
}

impl PatchCensus {
    /// `N(S)`: the number of equivalence classes.
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }
}

fn sort_offsets(offsets: &mut [Vec<f64>]) {
    offsets.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.partial_cmp(y).unwrap())
            .find(|o| *o != std::cmp::Ordering::Equal)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// The patch `(Lambda - x) ∩ B_s` at the `center`-th point.
///
/// Fails with [`Error::BoundaryPatch`] when the ball leaves the sampled
/// region (a truncated patch would fracture the census).
pub fn patch_at(p: &PointSet, center: usize, s: f64) -> Result<Patch> {
    let x = &p.points()[center];
    if p.region().boundary_distance(x) < s {
        return Err(Error::BoundaryPatch { index: center, radius: s });
    }
    let grid = NeighborGrid::build(p.points(), s.max(p.quantum()));
    patch_at_with_grid(p, &grid, center, s)
}

fn patch_at_with_grid(
    p: &PointSet,
    grid: &NeighborGrid,
    center: usize,
    s: f64,
) -> Result<Patch> {
    let x = &p.points()[center];
    if p.region().boundary_distance(x) < s {
        return Err(Error::BoundaryPatch { index: center, radius: s });
    }
    let members = grid.within(p.points(), x, s);
    let mut offsets: Vec<Vec<f64>> =
        members.iter().map(|&i| geom::sub(&p.points()[i], x)).collect();
    sort_offsets(&mut offsets);
    let key = match p.labels() {
        Some(labels) => {
            let mut diffs: Vec<Vec<i64>> = members
                .iter()
                .map(|&i| {
                    labels[i]
                        .iter()
                        .zip(&labels[center])
                        .map(|(a, b)| a - b)
                        .collect()
                })
                .collect();
            diffs.sort();
            PatchKey::Labels(diffs)
        }
        None => {
            let q = p.quantum();
            let quantized: Vec<Vec<i64>> = offsets
                .iter()
                .map(|o| o.iter().map(|v| (v / q).round() as i64).collect())
                .collect();
            PatchKey::Quantized(quantized)
        }
    };
    Ok(Patch { radius: s, offsets, key })
}

/// Census over all interior centers (those whose ball of radius `s` lies
/// inside the region).
pub fn patch_census(p: &PointSet, s: f64) -> Result<PatchCensus> {
    if s.is_nan() || s <= 0.0 {
        return Err(Error::Parse(format!("patch radius must be positive, got {s}")));
    }
    let grid = NeighborGrid::build(p.points(), s.max(p.quantum()));
    let mut index: HashMap<PatchKey, usize> = HashMap::new();
    let mut classes: Vec<PatchClass> = Vec::new();
    let mut centers_considered = 0;
    for i in 0..p.len() {
        if p.region().boundary_distance(&p.points()[i]) < s {
            continue;
        }
        centers_considered += 1;
        let patch = patch_at_with_grid(p, &grid, i, s)?;
        match index.get(&patch.key) {
            Some(&slot) => {
                classes[slot].count += 1;
                classes[slot].centers.push(i);
            }
            None => {
                index.insert(patch.key.clone(), classes.len());
                classes.push(PatchClass { representative: patch, count: 1, centers: vec![i] });
            }
        }
    }
    if centers_considered == 0 {
        return Err(Error::RegionTooSmall(format!(
            "no interior centers for patch radius {s}"
        )));
    }
    classes.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.centers[0].cmp(&b.centers[0]))
    });
    Ok(PatchCensus { radius: s, classes, centers_considered })
}

/// Per-volume frequency of `patch` measured in the centered ball
/// `B_{s_avg}`, plus the supremum deviation of the same estimate over the
/// given shifted windows — the finite witness of uniform patch
/// frequencies.
pub fn patch_frequency(
    p: &PointSet,
    patch: &Patch,
    window_positions: &[Vec<f64>],
    s_avg: f64,
) -> Result<(f64, f64)> {
    for pos in std::iter::once(&vec![0.0; p.dim()]).chain(window_positions.iter()) {
        if p.region().boundary_distance(pos) < s_avg + patch.radius {
            return Err(Error::RegionTooSmall(format!(
                "window at {pos:?} with radius {s_avg} + patch {} leaves the region",
                patch.radius
            )));
        }
    }
    let occurrences = locator_set(p, patch)?;
    let vol = ball_volume(p.dim(), s_avg);
    let count_in = |center: &[f64]| -> usize {
        occurrences
            .iter()
            .filter(|&&i| geom::dist(&p.points()[i], center) <= s_avg)
            .count()
    };
    let nu = count_in(&vec![0.0; p.dim()]) as f64 / vol;
    let sup_dev = window_positions
        .iter()
        .map(|pos| (count_in(pos) as f64 / vol - nu).abs())
        .fold(0.0f64, f64::max);
    Ok((nu, sup_dev))
}

/// Indices of all interior points at which `patch` occurs.
pub fn locator_set(p: &PointSet, patch: &Patch) -> Result<Vec<usize>> {
    let grid = NeighborGrid::build(p.points(), patch.radius.max(p.quantum()));
    let mut out = Vec::new();
    for i in 0..p.len() {
        if p.region().boundary_distance(&p.points()[i]) < patch.radius {
            continue;
        }
        let candidate = patch_at_with_grid(p, &grid, i, patch.radius)?;
        if candidate.key == patch.key {
            out.push(i);
        }
    }
    Ok(out)
}

/// Result of the repetitivity probe.
#[derive(Debug, Clone, PartialEq)]
pub enum Repetitivity {
    /// Smallest radius such that every probed ball contains an occurrence.
    Radius(f64),
    /// Some ball of half the region size contains no occurrence.
    NotRepetitiveInSample,
}

/// Smallest `R'` such that every ball of radius `R'` centered on a grid of
/// step `packing_radius` contains an occurrence of `patch`; test centers
/// stay far enough inside that occurrences are observable.
pub fn repetitivity_radius(p: &PointSet, patch: &Patch) -> Result<Repetitivity> {
    let occurrences = locator_set(p, patch)?;
    let half_region = p.region().inradius() / 2.0;
    if occurrences.is_empty() {
        return Ok(Repetitivity::NotRepetitiveInSample);
    }
    let step = p.min_gap() / 2.0;
    let margin = patch.radius;
    let occ_points: Vec<Vec<f64>> = occurrences.iter().map(|&i| p.points()[i].clone()).collect();
    let occ_grid = NeighborGrid::build(&occ_points, (4.0 * step).max(1e-9));
    let nearest_occurrence = |x: &[f64]| -> f64 {
        let mut r = 4.0 * step;
        loop {
            let mut best = f64::INFINITY;
            occ_grid.for_each_within(&occ_points, x, r, |i| {
                best = best.min(geom::dist(x, &occ_points[i]));
            });
            if best.is_finite() {
                return best;
            }
            r *= 2.0;
            if r > 4.0 * p.region().inradius() {
                return f64::INFINITY;
            }
        }
    };
    let reach = p.region().inradius() - margin;
    let n_steps = (reach / step).floor() as i64;
    let mut worst = 0.0f64;
    let mut probe = |x: &[f64]| {
        if p.region().boundary_distance(x) >= margin {
            worst = worst.max(nearest_occurrence(x));
        }
    };
    match p.dim() {
        1 => {
            for i in -n_steps..=n_steps {
                probe(&[i as f64 * step]);
            }
        }
        2 => {
            for i in -n_steps..=n_steps {
                for j in -n_steps..=n_steps {
                    probe(&[i as f64 * step, j as f64 * step]);
                }
            }
        }
        3 => {
            for i in -n_steps..=n_steps {
                for j in -n_steps..=n_steps {
                    for k in -n_steps..=n_steps {
                        probe(&[i as f64 * step, j as f64 * step, k as f64 * step]);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    if worst > half_region {
        Ok(Repetitivity::NotRepetitiveInSample)
    } else {
        Ok(Repetitivity::Radius(worst))
    }
}

/// The finite-`S` entropy sequence `(S, ln N(S) / vol(B_S))`; no
/// extrapolation is performed.
pub fn entropy_estimate(p: &PointSet, s_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    s_list
        .iter()
        .map(|&s| {
            let census = patch_census(p, s)?;
            let n = census.class_count() as f64;
            Ok((s, n.ln() / ball_volume(p.dim(), s)))
        })
        .collect()
}
