//! Point-set samples, Delone parameters, difference sets and Meyer
//! diagnostics.
//!
//! A [`PointSet`] is a finite sample of a Delone set inside a bounded,
//! centered region. Generated sets carry exact integer labels (lattice
//! coordinates for model sets, symbol counts for sequence tilings); see the
//! crate-level exactness policy.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::{self, NeighborGrid};

pub use crate::geom::Region;

/// Finite sample of a Delone set in a bounded region of `R^N`.
#[derive(Debug, Clone)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    region: Region,
    labels: Option<Vec<Vec<i64>>>,
    meta: String,
    min_gap: f64,
}

/// Packing and covering radii of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeloneParams {
    /// Half the minimum pairwise distance.
    pub packing_radius: f64,
    /// Half the largest gap (1D, exact) or the largest empty-ball radius
    /// found by grid sampling (dim >= 2, `exact = false`).
    pub covering_radius: f64,
    /// Whether the covering radius was computed exactly.
    pub exact: bool,
}

/// The difference set `(Lambda - Lambda) ∩ B_cutoff` with ordered-pair
/// multiplicities.
#[derive(Debug, Clone)]
pub struct DifferenceSet {
    /// Representative difference vectors, sorted lexicographically.
    pub vectors: Vec<Vec<f64>>,
    /// Number of ordered pairs `(x, y)` with `x - y` in the class.
    pub multiplicities: Vec<usize>,
    /// Exact label differences, parallel to `vectors`, when the sample is
    /// labeled.
    pub labels: Option<Vec<Vec<i64>>>,
    /// Norm cutoff used for the enumeration.
    pub cutoff: f64,
}

impl PointSet {
    /// Builds a point set, validating the invariants: all points inside the
    /// region, pairwise distinct positions, and (when present) labels in
    /// bijection with points.
    pub fn new(
        dim: usize,
        points: Vec<Vec<f64>>,
        region: Region,
        labels: Option<Vec<Vec<i64>>>,
        meta: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidPointSet(format!(
                "dimension {dim} not supported (1..=3)"
            )));
        }
        if let Region::Box { half_widths } = &region {
            if half_widths.len() != dim {
                return Err(Error::InvalidPointSet(format!(
                    "box region has {} half-widths for dimension {dim}",
                    half_widths.len()
                )));
            }
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidPointSet(format!(
                    "point {i} has dimension {} != {dim}",
                    p.len()
                )));
            }
            if !region.contains(p) {
                return Err(Error::InvalidPointSet(format!(
                    "point {i} at {p:?} lies outside the region"
                )));
            }
        }
        if let Some(ls) = &labels {
            if ls.len() != points.len() {
                return Err(Error::InvalidPointSet(
                    "label count differs from point count".into(),
                ));
            }
            let mut seen = std::collections::HashSet::with_capacity(ls.len());
            for l in ls {
                if !seen.insert(l.clone()) {
                    return Err(Error::InvalidPointSet(format!(
                        "duplicate label {l:?}"
                    )));
                }
            }
        }
        let min_gap = geom::min_pairwise_distance(&points);
        if min_gap <= 0.0 {
            return Err(Error::InvalidPointSet(
                "two points coincide".into(),
            ));
        }
        Ok(PointSet {
            dim,
            points,
            region,
            labels,
            meta: meta.into(),
            min_gap,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn labels(&self) -> Option<&[Vec<i64>]> {
        self.labels.as_deref()
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    /// Minimum pairwise distance of the sample (`+inf` for a single point).
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// Quantization tolerance for float difference keys:
    /// `1e-9 x packing radius`.
    pub fn quantum(&self) -> f64 {
        if self.min_gap.is_finite() {
            1e-9 * (self.min_gap / 2.0)
        } else {
            1e-9
        }
    }

    /// Translate the whole sample by `t`; the region is enlarged so the
    /// translated points remain inside. Labels are preserved.
    pub fn translated(&self, t: &[f64]) -> Result<PointSet> {
        let points: Vec<Vec<f64>> = self
            .points
            .iter()
            .map(|p| p.iter().zip(t).map(|(a, b)| a + b).collect())
            .collect();
        let region = match &self.region {
            Region::Ball { radius } => Region::Ball { radius: radius + geom::norm(t) },
            Region::Box { half_widths } => Region::Box {
                half_widths: half_widths
                    .iter()
                    .zip(t)
                    .map(|(h, ti)| h + ti.abs())
                    .collect(),
            },
        };
        PointSet::new(
            self.dim,
            points,
            region,
            self.labels.clone(),
            format!("{} + translate", self.meta),
        )
    }

    /// Serializes to the line-oriented text format: a header
    /// `dim N; region ball S` (or `region box H1 .. HN`) followed by one
    /// point per line with 17 significant digits; labels, when present,
    /// follow a `|` separator as integers.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.region {
            Region::Ball { radius } => {
                let _ = writeln!(out, "dim {}; region ball {:.16e}", self.dim, radius);
            }
            Region::Box { half_widths } => {
                let hw = half_widths
                    .iter()
                    .map(|h| format!("{h:.16e}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                let _ = writeln!(out, "dim {}; region box {hw}", self.dim);
            }
        }
        for (i, p) in self.points.iter().enumerate() {
            let coords = p
                .iter()
                .map(|x| format!("{x:.16e}"))
                .collect::<Vec<_>>()
                .join(" ");
            match &self.labels {
                Some(ls) => {
                    let lab = ls[i]
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(" ");
                    let _ = writeln!(out, "{coords} | {lab}");
                }
                None => {
                    let _ = writeln!(out, "{coords}");
                }
            }
        }
        out
    }

    /// Parses the text format produced by [`PointSet::to_text`].
    pub fn from_text(text: &str) -> Result<PointSet> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty file".into()))?;
        let header = header.trim();
        let rest = header
            .strip_prefix("dim ")
            .ok_or_else(|| Error::Parse(format!("bad header: {header}")))?;
        let (dim_str, region_str) = rest
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("bad header: {header}")))?;
        let dim: usize = dim_str
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension: {dim_str}")))?;
        let region_str = region_str.trim().strip_prefix("region ").ok_or_else(|| {
            Error::Parse(format!("bad region spec: {region_str}"))
        })?;
        let mut words = region_str.split_whitespace();
        let region = match words.next() {
            Some("ball") => {
                let radius: f64 = words
                    .next()
                    .ok_or_else(|| Error::Parse("missing ball radius".into()))?
                    .parse()
                    .map_err(|_| Error::Parse("bad ball radius".into()))?;
                Region::Ball { radius }
            }
            Some("box") => {
                let half_widths = words
                    .map(|w| w.parse::<f64>())
                    .collect::<std::result::Result<Vec<f64>, _>>()
                    .map_err(|_| Error::Parse("bad box half-widths".into()))?;
                Region::Box { half_widths }
            }
            other => return Err(Error::Parse(format!("bad region kind: {other:?}"))),
        };
        let mut points = Vec::new();
        let mut labels: Option<Vec<Vec<i64>>> = None;
        for (lineno, line) in lines.enumerate() {
            let (coord_part, label_part) = match line.split_once('|') {
                Some((c, l)) => (c, Some(l)),
                None => (line, None),
            };
            let p = coord_part
                .split_whitespace()
                .map(|w| w.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|_| Error::Parse(format!("bad point on line {}", lineno + 2)))?;
            points.push(p);
            match (label_part, &mut labels) {
                (Some(l), target) => {
                    let lab = l
                        .split_whitespace()
                        .map(|w| w.parse::<i64>())
                        .collect::<std::result::Result<Vec<i64>, _>>()
                        .map_err(|_| {
                            Error::Parse(format!("bad label on line {}", lineno + 2))
                        })?;
                    target.get_or_insert_with(Vec::new).push(lab);
                }
                (None, Some(_)) => {
                    return Err(Error::Parse(format!(
                        "missing label on line {}",
                        lineno + 2
                    )))
                }
                (None, None) => {}
            }
        }
        PointSet::new(dim, points, region, labels, "parsed")
    }
}

/// Packing and covering radii of the sample.
///
/// The packing radius is half the minimum pairwise distance. In 1D the
/// covering radius is half the largest gap between consecutive points
/// (exact; gaps to the region boundary are sampling artifacts and are
/// excluded). In dimension >= 2 it is estimated on a grid of step
/// `packing/10`, keeping only grid points whose empty ball lies inside the
/// region, and flagged `exact = false`.
pub fn delone_params(p: &PointSet) -> Result<DeloneParams> {
    if p.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 points, got {}",
            p.len()
        )));
    }
    let packing = p.min_gap() / 2.0;
    if p.dim() == 1 {
        let mut xs: Vec<f64> = p.points().iter().map(|q| q[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let covering = xs
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0f64, f64::max)
            / 2.0;
        return Ok(DeloneParams {
            packing_radius: packing,
            covering_radius: covering,
            exact: true,
        });
    }
    let step = packing / 10.0;
    let grid = NeighborGrid::build(p.points(), (4.0 * packing).max(step));
    let inradius = p.region().inradius();
    let n_steps = (inradius / step).floor() as i64;
    let mut covering = 0.0f64;
    let mut probe = |x: &[f64]| {
        let mut nearest = f64::INFINITY;
        let mut r = 4.0 * packing;
        loop {
            grid.for_each_within(p.points(), x, r, |i| {
                nearest = nearest.min(geom::dist(x, &p.points()[i]));
            });
            if nearest.is_finite() {
                break;
            }
            r *= 2.0;
            if r > 2.0 * inradius {
                break;
            }
        }
        // Exclude grid points whose empty ball pokes out of the region.
        if nearest.is_finite() && p.region().boundary_distance(x) >= nearest {
            covering = covering.max(nearest);
        }
    };
    match p.dim() {
        2 => {
            for i in -n_steps..=n_steps {
                for j in -n_steps..=n_steps {
                    let x = [i as f64 * step, j as f64 * step];
                    if p.region().contains(&x) {
                        probe(&x);
                    }
                }
            }
        }
        3 => {
            for i in -n_steps..=n_steps {
                for j in -n_steps..=n_steps {
                    for k in -n_steps..=n_steps {
                        let x = [i as f64 * step, j as f64 * step, k as f64 * step];
                        if p.region().contains(&x) {
                            probe(&x);
                        }
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(DeloneParams {
        packing_radius: packing,
        covering_radius: covering,
        exact: false,
    })
}

/// Key for grouping difference vectors: exact label arithmetic when labels
/// are present, otherwise quantized floats (with a neighbor-merge pass so a
/// class cannot be split by landing on a bucket edge).
struct DiffGrouper<'a> {
    p: &'a PointSet,
    quantum: f64,
    // key -> index into the output arrays
    index: HashMap<Vec<i64>, usize>,
    vectors: Vec<Vec<f64>>,
    labels: Vec<Vec<i64>>,
    mults: Vec<usize>,
}

impl<'a> DiffGrouper<'a> {
    fn new(p: &'a PointSet) -> Self {
        DiffGrouper {
            p,
            quantum: p.quantum(),
            index: HashMap::new(),
            vectors: Vec::new(),
            labels: Vec::new(),
            mults: Vec::new(),
        }
    }

    fn add(&mut self, i: usize, j: usize, count: usize) {
        let z = geom::sub(&self.p.points()[i], &self.p.points()[j]);
        match self.p.labels() {
            Some(ls) => {
                let key: Vec<i64> = ls[i].iter().zip(&ls[j]).map(|(a, b)| a - b).collect();
                match self.index.get(&key) {
                    Some(&slot) => self.mults[slot] += count,
                    None => {
                        self.index.insert(key.clone(), self.vectors.len());
                        self.vectors.push(z);
                        self.labels.push(key);
                        self.mults.push(count);
                    }
                }
            }
            None => {
                let key: Vec<i64> =
                    z.iter().map(|x| (x / self.quantum).round() as i64).collect();
                // check the 3^dim neighbor buckets for an existing
                // representative within the tolerance
                let dim = key.len();
                let mut found = None;
                let mut offsets = vec![0i64; dim];
                'scan: loop {
                    let cand: Vec<i64> =
                        key.iter().zip(&offsets).map(|(k, o)| k + o).collect();
                    if let Some(&slot) = self.index.get(&cand) {
                        if geom::dist(&self.vectors[slot], &z) <= self.quantum {
                            found = Some(slot);
                            break 'scan;
                        }
                    }
                    // advance offsets through {-1,0,1}^dim
                    let mut d = 0;
                    loop {
                        if d == dim {
                            break 'scan;
                        }
                        offsets[d] += 1;
                        if offsets[d] <= 1 {
                            break;
                        }
                        offsets[d] = -1;
                        d += 1;
                    }
                }
                match found {
                    Some(slot) => self.mults[slot] += count,
                    None => {
                        self.index.insert(key, self.vectors.len());
                        self.vectors.push(z);
                        self.labels.push(Vec::new());
                        self.mults.push(count);
                    }
                }
            }
        }
    }

    fn finish(self) -> DifferenceSet {
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
        DifferenceSet {
            vectors: order.iter().map(|&i| vectors[i].clone()).collect(),
            multiplicities: order.iter().map(|&i| self.mults[i]).collect(),
            labels: labeled
                .then(|| order.iter().map(|&i| self.labels[i].clone()).collect()),
            cutoff: 0.0,
        }
    }
}

/// Enumerates `(Lambda - Lambda) ∩ B_{s_max}` over all ordered pairs of the
/// sample, with multiplicities. Uses spatial bucketing; grouping follows
/// the exactness policy.
pub fn difference_set(p: &PointSet, s_max: f64) -> Result<DifferenceSet> {
    if s_max.is_nan() || s_max <= 0.0 {
        return Err(Error::Parse(format!("s_max must be positive, got {s_max}")));
    }
    let mut grouper = DiffGrouper::new(p);
    // z = 0 from the diagonal pairs (x, x)
    if !p.is_empty() {
        grouper.add(0, 0, p.len());
    }
    let grid = NeighborGrid::build(p.points(), s_max.max(1e-9));
    for i in 0..p.len() {
        grid.for_each_within(p.points(), &p.points()[i], s_max, |j| {
            if j != i {
                grouper.add(i, j, 1);
            }
        });
    }
    let mut ds = grouper.finish();
    ds.cutoff = s_max;
    Ok(ds)
}

/// Minimum distance between distinct elements of the difference set; a
/// value bounded away from zero as `s_max` grows is evidence of the Meyer
/// property.
pub fn meyer_diagnostic(p: &PointSet, s_max: f64) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::DegenerateSample("empty point set".into()));
    }
    let ds = difference_set(p, s_max)?;
    Ok(geom::min_pairwise_distance(&ds.vectors))
}

impl DifferenceSet {
    /// Multiplicity of the class containing `z` (within `tol`), or 0.
    pub fn multiplicity_of(&self, z: &[f64], tol: f64) -> usize {
        self.vectors
            .iter()
            .position(|v| geom::dist(v, z) <= tol)
            .map_or(0, |i| self.multiplicities[i])
    }
}
