//! Cut-and-project schemes over `R^N x R^m`.
//!
//! A scheme is a lattice `L~` in `R^(N+m)` given by an invertible basis
//! matrix `B` (first `N` rows physical, last `m` rows internal) together
//! with a window `W` in internal space. The model set is
//! `{ (Bq)_phys : q integer, (Bq)_int in W }`; every generated point keeps
//! its lattice coordinate `q` as an exact label.
//!
//! The dual lattice `2 pi B^{-T}` yields the Fourier module: the candidate
//! Bragg-peak positions `k` with internal components `k*`, paired so that
//! `exp(i k . l_phys) exp(i k* . l_int) = 1` on the lattice. Closed-form
//! window transforms feed the intensity formula in [`crate::diffraction`].
//! Normalization conventions are fixed at the crate root.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Region;
use crate::pointset::PointSet;

/// Window in internal space; membership is half-open where applicable.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub kind: WindowKind,
    /// Caller-asserted regularity flag (`boundary has measure zero`);
    /// schemes warn when it is absent.
    pub regular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowKind {
    /// Half-open interval `[a, b)`.
    Interval { a: f64, b: f64 },
    /// Half-open box `[lo_i, hi_i)` per axis.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Convex polygon, counterclockwise vertex list; boundary points count
    /// only on "lower" edges (outward normal lexicographically negative).
    Polygon { vertices: Vec<[f64; 2]> },
    /// Closed ball around the internal origin.
    Ball { radius: f64 },
}

impl Window {
    pub fn interval(a: f64, b: f64) -> Self {
        Window { kind: WindowKind::Interval { a, b }, regular: true }
    }

    /// Dimension of the internal space the window lives in; `None` for a
    /// ball, which adapts to the scheme.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            WindowKind::Interval { .. } => Some(1),
            WindowKind::Box { lo, .. } => Some(lo.len()),
            WindowKind::Polygon { .. } => Some(2),
            WindowKind::Ball { .. } => None,
        }
    }

    pub fn validate(&self, int_dim: usize) -> Result<()> {
        if let Some(d) = self.dim() {
            if d != int_dim {
                return Err(Error::InvalidWindow(format!(
                    "window dimension {d} != internal dimension {int_dim}"
                )));
            }
        }
        match &self.kind {
            WindowKind::Interval { a, b } => {
                if b.partial_cmp(a) != Some(std::cmp::Ordering::Greater) {
                    return Err(Error::InvalidWindow(format!("empty interval [{a}, {b})")));
                }
            }
            WindowKind::Box { lo, hi } => {
                if lo.len() != hi.len()
                    || lo.iter().zip(hi).any(|(l, h)| h.partial_cmp(l) != Some(std::cmp::Ordering::Greater))
                {
                    return Err(Error::InvalidWindow("empty or malformed box".into()));
                }
            }
            WindowKind::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidWindow("polygon needs >= 3 vertices".into()));
                }
                let n = vertices.len();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                    if cross <= 0.0 {
                        return Err(Error::InvalidWindow(
                            "polygon must be strictly convex and counterclockwise".into(),
                        ));
                    }
                }
            }
            WindowKind::Ball { radius } => {
                if radius.is_nan() || *radius <= 0.0 {
                    return Err(Error::InvalidWindow(format!("ball radius {radius}")));
                }
                if int_dim > 2 {
                    return Err(Error::InvalidWindow(
                        "ball windows are supported for internal dimension <= 2".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Half-open membership test (see [`WindowKind`]).
    pub fn contains(&self, y: &[f64]) -> bool {
        match &self.kind {
            WindowKind::Interval { a, b } => *a <= y[0] && y[0] < *b,
            WindowKind::Box { lo, hi } => y
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| l <= v && v < h),
            WindowKind::Polygon { vertices } => polygon_contains(vertices, [y[0], y[1]]),
            WindowKind::Ball { radius } => crate::geom::norm(y) <= *radius,
        }
    }

    pub fn volume(&self, int_dim: usize) -> f64 {
        match &self.kind {
            WindowKind::Interval { a, b } => b - a,
            WindowKind::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            WindowKind::Polygon { vertices } => polygon_area(vertices),
            WindowKind::Ball { radius } => crate::geom::ball_volume(int_dim, *radius),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bbox(&self, int_dim: usize) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            WindowKind::Interval { a, b } => (vec![*a], vec![*b]),
            WindowKind::Box { lo, hi } => (lo.clone(), hi.clone()),
            WindowKind::Polygon { vertices } => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for v in vertices {
                    for j in 0..2 {
                        lo[j] = lo[j].min(v[j]);
                        hi[j] = hi[j].max(v[j]);
                    }
                }
                (lo, hi)
            }
            WindowKind::Ball { radius } => {
                (vec![-radius; int_dim], vec![*radius; int_dim])
            }
        }
    }

    /// Analytic `int_W exp(i k* . y) dy`. Intervals, boxes and polygons use
    /// closed forms; balls use a spectrally convergent radial quadrature to
    /// relative error 1e-8.
    pub fn fourier(&self, k_star: &[f64]) -> Complex64 {
        match &self.kind {
            WindowKind::Interval { a, b } => interval_fourier(*a, *b, k_star[0]),
            WindowKind::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .zip(k_star)
                .map(|((l, h), k)| interval_fourier(*l, *h, *k))
                .product(),
            WindowKind::Polygon { vertices } => polygon_fourier(vertices, [k_star[0], k_star[1]]),
            WindowKind::Ball { radius } => ball_fourier(*radius, k_star),
        }
    }

    /// Exact overlap volume `vol(W ∩ (W - shift))`.
    pub fn overlap_volume(&self, shift: &[f64]) -> f64 {
        match &self.kind {
            WindowKind::Interval { a, b } => ((b - a) - shift[0].abs()).max(0.0),
            WindowKind::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .zip(shift)
                .map(|((l, h), s)| ((h - l) - s.abs()).max(0.0))
                .product(),
            WindowKind::Polygon { vertices } => {
                let shifted: Vec<[f64; 2]> = vertices
                    .iter()
                    .map(|v| [v[0] - shift[0], v[1] - shift[1]])
                    .collect();
                convex_clip_area(vertices, &shifted)
            }
            WindowKind::Ball { radius } => match shift.len() {
                1 => (2.0 * radius - shift[0].abs()).max(0.0),
                2 => {
                    let d = crate::geom::norm(shift);
                    if d >= 2.0 * radius {
                        0.0
                    } else {
                        2.0 * radius * radius * (d / (2.0 * radius)).acos()
                            - d / 2.0 * (4.0 * radius * radius - d * d).sqrt()
                    }
                }
                _ => panic!("ball overlap only implemented for m <= 2"),
            },
        }
    }
}

fn polygon_contains(vertices: &[[f64; 2]], y: [f64; 2]) -> bool {
    let scale = vertices
        .iter()
        .flat_map(|v| v.iter())
        .chain(y.iter())
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-12 * scale;
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let e = [b[0] - a[0], b[1] - a[1]];
        let s = e[0] * (y[1] - a[1]) - e[1] * (y[0] - a[0]);
        if s < -tol {
            return false;
        }
        if s.abs() <= tol {
            // on this edge: half-open rule keeps edges whose outward
            // normal is lexicographically negative
            let normal = [e[1], -e[0]];
            let keep = normal[0] < -tol || (normal[0].abs() <= tol && normal[1] < 0.0);
            if !keep {
                return false;
            }
        }
    }
    true
}

fn polygon_area(vertices: &[[f64; 2]]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        acc += a[0] * b[1] - a[1] * b[0];
    }
    acc / 2.0
}

/// Sutherland-Hodgman clip of convex `subject` by convex ccw `clip`;
/// returns the intersection area.
fn convex_clip_area(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> f64 {
    let mut poly: Vec<[f64; 2]> = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if poly.is_empty() {
            return 0.0;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let inside = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0;
        let intersect = |p: [f64; 2], q: [f64; 2]| -> [f64; 2] {
            let d1 = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
            let d2 = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
            let t = d1 / (d1 - d2);
            [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
        };
        let mut out = Vec::with_capacity(poly.len() + 4);
        for j in 0..poly.len() {
            let cur = poly[j];
            let nxt = poly[(j + 1) % poly.len()];
            match (inside(cur), inside(nxt)) {
                (true, true) => out.push(nxt),
                (true, false) => out.push(intersect(cur, nxt)),
                (false, true) => {
                    out.push(intersect(cur, nxt));
                    out.push(nxt);
                }
                (false, false) => {}
            }
        }
        poly = out;
    }
    if poly.len() < 3 {
        0.0
    } else {
        polygon_area(&poly).abs()
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn interval_fourier(a: f64, b: f64, k: f64) -> Complex64 {
    let mid = (a + b) / 2.0;
    let half = (b - a) / 2.0;
    Complex64::from_polar(1.0, k * mid) * ((b - a) * sinc(k * half))
}

/// sinh(z)/z with a series branch near zero.
fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

/// First divided difference of exp: `(e^a - e^b)/(a - b)`, confluent-safe.
fn exp_dd1(a: Complex64, b: Complex64) -> Complex64 {
    ((a + b) / 2.0).exp() * sinhc((a - b) / 2.0)
}

/// Second divided difference of exp over three nodes, equal to
/// `int_{u,v>=0, u+v<=1} e^{x1 u + x2 v} du dv` when the first node is 0.
fn exp_dd2(x0: Complex64, x1: Complex64, x2: Complex64) -> Complex64 {
    let sep01 = (x0 - x1).norm();
    let sep02 = (x0 - x2).norm();
    let sep12 = (x1 - x2).norm();
    let max_sep = sep01.max(sep02).max(sep12);
    if max_sep < 1e-3 {
        // all nodes confluent: shifted complete-homogeneous series
        let m = (x0 + x1 + x2) / 3.0;
        let d = [x0 - m, x1 - m, x2 - m];
        let e1 = d[0] + d[1] + d[2];
        let e2 = d[0] * d[1] + d[0] * d[2] + d[1] * d[2];
        let e3 = d[0] * d[1] * d[2];
        let h1 = e1;
        let h2 = e1 * e1 - e2;
        let h3 = e1 * e1 * e1 - 2.0 * e1 * e2 + e3;
        let h4 = e1 * e1 * e1 * e1 - 3.0 * e1 * e1 * e2 + e2 * e2 + 2.0 * e1 * e3;
        m.exp()
            * (Complex64::new(0.5, 0.0) + h1 / 6.0 + h2 / 24.0 + h3 / 120.0 + h4 / 720.0)
    } else if sep02 >= sep01 && sep02 >= sep12 {
        (exp_dd1(x0, x1) - exp_dd1(x1, x2)) / (x0 - x2)
    } else if sep01 >= sep12 {
        (exp_dd1(x0, x2) - exp_dd1(x2, x1)) / (x0 - x1)
    } else {
        (exp_dd1(x1, x0) - exp_dd1(x0, x2)) / (x1 - x2)
    }
}

fn polygon_fourier(vertices: &[[f64; 2]], k: [f64; 2]) -> Complex64 {
    // fan triangulation from the centroid; per-triangle closed form via
    // divided differences of exp
    let n = vertices.len();
    let cx = vertices.iter().map(|v| v[0]).sum::<f64>() / n as f64;
    let cy = vertices.iter().map(|v| v[1]).sum::<f64>() / n as f64;
    let c = [cx, cy];
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let v1 = vertices[i];
        let v2 = vertices[(i + 1) % n];
        let e1 = [v1[0] - c[0], v1[1] - c[1]];
        let e2 = [v2[0] - c[0], v2[1] - c[1]];
        let area2 = e1[0] * e2[1] - e1[1] * e2[0]; // = 2 * triangle area
        let alpha = Complex64::new(0.0, k[0] * e1[0] + k[1] * e1[1]);
        let beta = Complex64::new(0.0, k[0] * e2[0] + k[1] * e2[1]);
        let phase = Complex64::new(0.0, k[0] * c[0] + k[1] * c[1]).exp();
        total += phase * area2 * exp_dd2(Complex64::new(0.0, 0.0), alpha, beta);
    }
    total
}

fn ball_fourier(radius: f64, k_star: &[f64]) -> Complex64 {
    match k_star.len() {
        1 => interval_fourier(-radius, radius, k_star[0]),
        2 => {
            // rotate k to the x-axis and integrate
            // r^2 * int_0^{2pi} exp(i K r cos(phi)) sin^2(phi) dphi
            // by periodic trapezoid (spectral convergence)
            let kr = crate::geom::norm(k_star) * radius;
            let mut n = 64usize.max((8.0 * kr) as usize).next_power_of_two();
            let mut prev = Complex64::new(f64::INFINITY, 0.0);
            loop {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                    let s = phi.sin();
                    acc += Complex64::from_polar(1.0, kr * phi.cos()) * (s * s);
                }
                let val = acc * (2.0 * std::f64::consts::PI / n as f64) * radius * radius;
                let scale = val.norm().max(radius * radius * 1e-8);
                if (val - prev).norm() <= 1e-9 * scale || n > 1 << 22 {
                    return val;
                }
                prev = val;
                n *= 2;
            }
        }
        _ => panic!("ball window transform only implemented for m <= 2"),
    }
}

/// Finite witnesses used to validate a scheme at construction time.
#[derive(Debug, Clone, Copy)]
pub struct CheckBounds {
    /// Scan all integer vectors with `||q||_inf <= q_check`; 0 picks a
    /// dimension-dependent default of about 1e4 vectors.
    pub q_check: usize,
    /// Nonzero lattice vectors with physical norm below this fail the
    /// injectivity witness.
    pub eps_inj: f64,
    /// Grid resolution of the density witness over the window bounding
    /// box; 0 picks one eighth of the largest extent.
    pub delta_dense: f64,
}

impl Default for CheckBounds {
    fn default() -> Self {
        CheckBounds { q_check: 0, eps_inj: 1e-6, delta_dense: 0.0 }
    }
}

/// Element of the Fourier module: `(k, k*) = 2 pi B^{-T} q`.
#[derive(Debug, Clone)]
pub struct ModuleElement {
    pub q: Vec<i64>,
    pub k: Vec<f64>,
    pub k_star: Vec<f64>,
}

/// Dual-lattice enumeration, sorted by `|k|`.
#[derive(Debug, Clone)]
pub struct FourierModule {
    pub dual_basis: DMatrix<f64>,
    pub elements: Vec<ModuleElement>,
}

/// A validated cut-and-project scheme.
#[derive(Debug, Clone)]
pub struct CutProjectScheme {
    phys_dim: usize,
    int_dim: usize,
    basis: DMatrix<f64>,
    basis_inv: DMatrix<f64>,
    window: Window,
    covolume: f64,
    warnings: Vec<String>,
    description: String,
}

impl CutProjectScheme {
    /// Validates and builds a scheme: invertible basis, well-formed window,
    /// injectivity witness (hard error naming the violating `q`), density
    /// witness and regularity flag (warnings).
    pub fn new(
        phys_dim: usize,
        int_dim: usize,
        basis: DMatrix<f64>,
        window: Window,
        checks: CheckBounds,
    ) -> Result<Self> {
        let d = phys_dim + int_dim;
        if phys_dim == 0 || int_dim == 0 {
            return Err(Error::Config("phys_dim and int_dim must be positive".into()));
        }
        if basis.nrows() != d || basis.ncols() != d {
            return Err(Error::Config(format!(
                "basis must be {d}x{d}, got {}x{}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        window.validate(int_dim)?;
        let det = basis.determinant();
        let scale = basis.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        if det.abs() < 1e-12 * scale.powi(d as i32) {
            return Err(Error::SingularBasis { det });
        }
        let basis_inv = basis
            .clone()
            .try_inverse()
            .ok_or(Error::SingularBasis { det })?;

        let mut warnings = Vec::new();
        if !window.regular {
            warnings.push(
                "window lacks the regularity flag; diffraction formulas assume a \
                 measure-zero boundary"
                    .into(),
            );
        }

        let q_check = if checks.q_check > 0 {
            checks.q_check
        } else {
            ((1e4f64.powf(1.0 / d as f64) - 1.0) / 2.0).ceil().max(1.0) as usize
        };
        let (blo, bhi) = window.bbox(int_dim);
        let extent = blo
            .iter()
            .zip(&bhi)
            .map(|(l, h)| h - l)
            .fold(0.0f64, f64::max);
        let delta = if checks.delta_dense > 0.0 {
            checks.delta_dense
        } else {
            extent / 8.0
        };
        let cells_per_dim: Vec<usize> = blo
            .iter()
            .zip(&bhi)
            .map(|(l, h)| ((h - l) / delta).ceil().max(1.0) as usize)
            .collect();
        let mut hit = vec![false; cells_per_dim.iter().product()];

        let mut q = vec![-(q_check as i64); d];
        let mut injective_degenerate: Option<Vec<i64>> = None;
        'outer: loop {
            if q.iter().any(|&x| x != 0) {
                let qv = DVector::from_iterator(d, q.iter().map(|&x| x as f64));
                let v = &basis * &qv;
                let phys_norm = v.rows(0, phys_dim).norm();
                let q_scale = q.iter().map(|x| x.abs()).max().unwrap() as f64;
                let machine = 1e-13 * scale * q_scale.max(1.0) * d as f64;
                if phys_norm <= machine {
                    // exact collapse: the projection is not injective, but
                    // degenerate schemes (e.g. decoupled lattices) are still
                    // usable for generation, so only warn
                    if injective_degenerate.is_none() {
                        injective_degenerate = Some(q.clone());
                    }
                } else if phys_norm < checks.eps_inj {
                    return Err(Error::InjectivityFailure { q: q.clone(), norm: phys_norm });
                }
                // density witness: mark the bbox cell of the internal part
                let mut cell = 0usize;
                let mut stride = 1usize;
                let mut in_bbox = true;
                for j in 0..int_dim {
                    let y = v[phys_dim + j];
                    if y < blo[j] || y >= bhi[j] {
                        in_bbox = false;
                        break;
                    }
                    let idx = (((y - blo[j]) / delta) as usize).min(cells_per_dim[j] - 1);
                    cell += idx * stride;
                    stride *= cells_per_dim[j];
                }
                if in_bbox {
                    hit[cell] = true;
                }
            }
            // advance q through the scan box
            let mut advanced = false;
            for slot in q.iter_mut() {
                *slot += 1;
                if *slot <= q_check as i64 {
                    advanced = true;
                    break;
                }
                *slot = -(q_check as i64);
            }
            if !advanced {
                break 'outer;
            }
        }
        if let Some(q) = injective_degenerate {
            warnings.push(format!(
                "degenerate projection: lattice vector q = {q:?} has zero physical part \
                 (pi is not injective on the full lattice)"
            ));
        }
        if hit.iter().any(|h| !h) {
            warnings.push(format!(
                "internal projection may not be dense: empty window cell at resolution {delta:.3e}"
            ));
        }

        Ok(CutProjectScheme {
            phys_dim,
            int_dim,
            basis,
            basis_inv,
            window,
            covolume: det.abs(),
            warnings,
            description: String::from("custom scheme"),
        })
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    pub fn int_dim(&self) -> usize {
        self.int_dim
    }

    pub fn total_dim(&self) -> usize {
        self.phys_dim + self.int_dim
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_inv(&self) -> &DMatrix<f64> {
        &self.basis_inv
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// `|det B|`, cached at construction.
    pub fn covolume(&self) -> f64 {
        self.covolume
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Density of the model set: `vol(W) / covolume`.
    pub fn density(&self) -> f64 {
        self.window.volume(self.int_dim) / self.covolume
    }

    /// Physical and internal parts of the lattice vector `B q`.
    pub fn star_map(&self, q: &[i64]) -> (Vec<f64>, Vec<f64>) {
        let qv = DVector::from_iterator(q.len(), q.iter().map(|&x| x as f64));
        let v = &self.basis * qv;
        (
            v.iter().take(self.phys_dim).copied().collect(),
            v.iter().skip(self.phys_dim).copied().collect(),
        )
    }

    /// The model set `⋏(W)` restricted to the centered physical ball.
    pub fn model_set_points(&self, region_radius: f64) -> Result<PointSet> {
        self.model_set_points_at(region_radius, None, None)
    }

    /// The translated model set `t + ⋏(W - h)` restricted to the centered
    /// physical ball; `(t, h)` is the torus address of the hull element.
    pub fn model_set_points_at(
        &self,
        region_radius: f64,
        t: Option<&[f64]>,
        h: Option<&[f64]>,
    ) -> Result<PointSet> {
        if region_radius.is_nan() || region_radius <= 0.0 {
            return Err(Error::Config(format!(
                "region radius must be positive, got {region_radius}"
            )));
        }
        let zero_t = vec![0.0; self.phys_dim];
        let zero_h = vec![0.0; self.int_dim];
        let t = t.unwrap_or(&zero_t);
        let h = h.unwrap_or(&zero_h);
        if t.len() != self.phys_dim || h.len() != self.int_dim {
            return Err(Error::Config(format!(
                "torus address needs ({}, {}) components",
                self.phys_dim, self.int_dim
            )));
        }
        let (wlo, whi) = self.window.bbox(self.int_dim);
        let mut lo = Vec::with_capacity(self.total_dim());
        let mut hi = Vec::with_capacity(self.total_dim());
        for ti in t {
            lo.push(-region_radius - ti);
            hi.push(region_radius - ti);
        }
        for ((wl, wh), hj) in wlo.iter().zip(&whi).zip(h) {
            lo.push(wl - hj);
            hi.push(wh - hj);
        }
        let candidates = enumerate_lattice_in_box(&self.basis, &self.basis_inv, &lo, &hi);
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for q in candidates {
            let (phys, int) = self.star_map(&q);
            let x: Vec<f64> = phys.iter().zip(t).map(|(p, ti)| p + ti).collect();
            let y: Vec<f64> = int.iter().zip(h).map(|(v, hj)| v + hj).collect();
            if crate::geom::norm(&x) <= region_radius && self.window.contains(&y) {
                points.push(x);
                labels.push(q);
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            points[a]
                .iter()
                .zip(&points[b])
                .map(|(x, y)| x.partial_cmp(y).unwrap())
                .find(|o| *o != std::cmp::Ordering::Equal)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        PointSet::new(
            self.phys_dim,
            order.iter().map(|&i| points[i].clone()).collect(),
            Region::Ball { radius: region_radius },
            Some(order.iter().map(|&i| labels[i].clone()).collect()),
            format!("model set ({})", self.description),
        )
    }

    /// Enumerates the Fourier module: dual vectors `2 pi B^{-T} q` with
    /// `|k| <= k_phys_max` and `|k*| <= k_int_max`, sorted by `|k|`.
    pub fn fourier_module(&self, k_phys_max: f64, k_int_max: f64) -> FourierModule {
        let two_pi = 2.0 * std::f64::consts::PI;
        let dual = self.basis_inv.transpose() * two_pi;
        let dual_inv = self.basis.transpose() / two_pi;
        let d = self.total_dim();
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for _ in 0..self.phys_dim {
            lo.push(-k_phys_max);
            hi.push(k_phys_max);
        }
        for _ in 0..self.int_dim {
            lo.push(-k_int_max);
            hi.push(k_int_max);
        }
        let mut elements = Vec::new();
        for q in enumerate_lattice_in_box(&dual, &dual_inv, &lo, &hi) {
            let qv = DVector::from_iterator(d, q.iter().map(|&x| x as f64));
            let v = &dual * qv;
            let k: Vec<f64> = v.iter().take(self.phys_dim).copied().collect();
            let k_star: Vec<f64> = v.iter().skip(self.phys_dim).copied().collect();
            if crate::geom::norm(&k) <= k_phys_max && crate::geom::norm(&k_star) <= k_int_max {
                elements.push(ModuleElement { q, k, k_star });
            }
        }
        elements.sort_by(|a, b| {
            crate::geom::norm(&a.k)
                .partial_cmp(&crate::geom::norm(&b.k))
                .unwrap()
                .then_with(|| a.q.cmp(&b.q))
        });
        FourierModule { dual_basis: dual, elements }
    }

    /// Reads the JSON scheme configuration (see the format in
    /// [`SchemeConfig`]).
    pub fn from_json(json: &str) -> Result<Self> {
        let config: SchemeConfig = serde_json::from_str(json)?;
        config.build()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SchemeConfig::from_scheme(self))?)
    }
}

/// Integer vectors `q` with `B q` inside the box `[lo, hi]` per row, found
/// by a depth-first scan with per-level interval pruning. Candidates may
/// exceed the box by a hair (1e-9 slack); callers apply their exact filter.
pub(crate) fn enumerate_lattice_in_box(
    basis: &DMatrix<f64>,
    basis_inv: &DMatrix<f64>,
    lo: &[f64],
    hi: &[f64],
) -> Vec<Vec<i64>> {
    let d = basis.nrows();
    let eps = 1e-9
        * lo.iter()
            .chain(hi.iter())
            .fold(1.0f64, |m, x| m.max(x.abs()));
    // global integer range per coordinate from the inverse image of the box
    let mut qlo = vec![0i64; d];
    let mut qhi = vec![0i64; d];
    for i in 0..d {
        let mut a = 0.0;
        let mut b = 0.0;
        for j in 0..d {
            let c = basis_inv[(i, j)];
            let (x, y) = (c * lo[j], c * hi[j]);
            a += x.min(y);
            b += x.max(y);
        }
        qlo[i] = (a - eps).floor() as i64;
        qhi[i] = (b + eps).ceil() as i64;
    }
    // suffix ranges of sum_{j >= k} B[i][j] * q_j over the global box
    let mut rest_min = vec![vec![0.0f64; d]; d + 1];
    let mut rest_max = vec![vec![0.0f64; d]; d + 1];
    for k in (0..d).rev() {
        for i in 0..d {
            let c = basis[(i, k)];
            let (x, y) = (c * qlo[k] as f64, c * qhi[k] as f64);
            rest_min[k][i] = rest_min[k + 1][i] + x.min(y);
            rest_max[k][i] = rest_max[k + 1][i] + x.max(y);
        }
    }
    let mut scan = BoxScan {
        d,
        basis,
        lo,
        hi,
        qlo,
        qhi,
        rest_min,
        rest_max,
        eps,
        q: vec![0i64; d],
        partial: vec![vec![0.0f64; d]; d + 1],
        out: Vec::new(),
    };
    scan.descend(0);
    scan.out
}

struct BoxScan<'a> {
    d: usize,
    basis: &'a DMatrix<f64>,
    lo: &'a [f64],
    hi: &'a [f64],
    qlo: Vec<i64>,
    qhi: Vec<i64>,
    rest_min: Vec<Vec<f64>>,
    rest_max: Vec<Vec<f64>>,
    eps: f64,
    q: Vec<i64>,
    partial: Vec<Vec<f64>>,
    out: Vec<Vec<i64>>,
}

impl BoxScan<'_> {
    fn descend(&mut self, level: usize) {
        if level == self.d {
            self.out.push(self.q.clone());
            return;
        }
        // tighten the level range using every row with a nonzero coefficient
        let mut a = self.qlo[level] as f64;
        let mut b = self.qhi[level] as f64;
        for i in 0..self.d {
            let c = self.basis[(i, level)];
            if c == 0.0 {
                continue;
            }
            let base = self.partial[level][i];
            let lo_bound = self.lo[i] - base - self.rest_max[level + 1][i] - self.eps;
            let hi_bound = self.hi[i] - base - self.rest_min[level + 1][i] + self.eps;
            let (mut lo_q, mut hi_q) = (lo_bound / c, hi_bound / c);
            if c < 0.0 {
                std::mem::swap(&mut lo_q, &mut hi_q);
            }
            a = a.max(lo_q);
            b = b.min(hi_q);
        }
        let start = a.ceil() as i64;
        let end = b.floor() as i64;
        for val in start..=end {
            self.q[level] = val;
            for i in 0..self.d {
                self.partial[level + 1][i] =
                    self.partial[level][i] + self.basis[(i, level)] * val as f64;
            }
            self.descend(level + 1);
        }
    }
}

/// JSON configuration of a scheme. Field names and nesting are part of the
/// external interface:
///
/// ```json
/// {"phys_dim":1,"int_dim":1,
///  "basis":[[1,1.6180339887],[1,-0.6180339887]],
///  "window":{"type":"interval","a":-0.3819660113,"b":0.6180339887,"regular":true}}
/// ```
#[derive(Debug, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub phys_dim: usize,
    pub int_dim: usize,
    /// Row-major basis matrix; first `phys_dim` rows are physical.
    pub basis: Vec<Vec<f64>>,
    pub window: WindowConfig,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum WindowConfig {
    Interval {
        a: f64,
        b: f64,
        #[serde(default)]
        regular: bool,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default)]
        regular: bool,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
        #[serde(default)]
        regular: bool,
    },
    Ball {
        radius: f64,
        #[serde(default)]
        regular: bool,
    },
}

impl SchemeConfig {
    pub fn build(&self) -> Result<CutProjectScheme> {
        let d = self.phys_dim + self.int_dim;
        if self.basis.len() != d || self.basis.iter().any(|row| row.len() != d) {
            return Err(Error::Config(format!("basis must be {d}x{d}")));
        }
        let basis = DMatrix::from_fn(d, d, |i, j| self.basis[i][j]);
        let window = match &self.window {
            WindowConfig::Interval { a, b, regular } => Window {
                kind: WindowKind::Interval { a: *a, b: *b },
                regular: *regular,
            },
            WindowConfig::Box { lo, hi, regular } => Window {
                kind: WindowKind::Box { lo: lo.clone(), hi: hi.clone() },
                regular: *regular,
            },
            WindowConfig::Polygon { vertices, regular } => Window {
                kind: WindowKind::Polygon { vertices: vertices.clone() },
                regular: *regular,
            },
            WindowConfig::Ball { radius, regular } => Window {
                kind: WindowKind::Ball { radius: *radius },
                regular: *regular,
            },
        };
        CutProjectScheme::new(self.phys_dim, self.int_dim, basis, window, CheckBounds::default())
    }

    pub fn from_scheme(s: &CutProjectScheme) -> Self {
        let d = s.total_dim();
        let window = match &s.window.kind {
            WindowKind::Interval { a, b } => {
                WindowConfig::Interval { a: *a, b: *b, regular: s.window.regular }
            }
            WindowKind::Box { lo, hi } => WindowConfig::Box {
                lo: lo.clone(),
                hi: hi.clone(),
                regular: s.window.regular,
            },
            WindowKind::Polygon { vertices } => WindowConfig::Polygon {
                vertices: vertices.clone(),
                regular: s.window.regular,
            },
            WindowKind::Ball { radius } => {
                WindowConfig::Ball { radius: *radius, regular: s.window.regular }
            }
        };
        SchemeConfig {
            phys_dim: s.phys_dim,
            int_dim: s.int_dim,
            basis: (0..d)
                .map(|i| (0..d).map(|j| s.basis[(i, j)]).collect())
                .collect(),
            window,
        }
    }
}

/// The golden ratio.
pub const TAU: f64 = 1.618_033_988_749_895;

/// Canonical schemes used throughout the tests and the CLI.
///
/// * `fibonacci`: `N = m = 1`, basis rows `[1, tau]` / `[1, 1 - tau]`
///   (covolume `sqrt 5`), window `[-1, tau - 1)`, producing the Fibonacci
///   chain with gap lengths `{1, tau}`.
/// * `octagonal`: `N = m = 2`, the standard `Z^4` root-lattice embedding
///   with a regular-octagon window (the internal projection of the unit
///   hypercube), producing the eightfold Ammann-Beenker vertex set.
pub fn builtin(name: &str) -> Result<CutProjectScheme> {
    match name {
        "fibonacci" => {
            let basis = DMatrix::from_row_slice(2, 2, &[1.0, TAU, 1.0, 1.0 - TAU]);
            let window = Window::interval(-1.0, TAU - 1.0);
            let mut scheme =
                CutProjectScheme::new(1, 1, basis, window, CheckBounds::default())?;
            scheme.description = "fibonacci".into();
            Ok(scheme)
        }
        "octagonal" => {
            let c = std::f64::consts::FRAC_1_SQRT_2;
            // columns j = 0..4: physical (cos, sin)(pi j / 4),
            //                   internal (cos, sin)(3 pi j / 4)
            let basis = DMatrix::from_row_slice(
                4,
                4,
                &[
                    1.0, c, 0.0, -c, //
                    0.0, c, 1.0, c, //
                    1.0, -c, 0.0, c, //
                    0.0, c, -1.0, c,
                ],
            );
            let generators = [[1.0, 0.0], [-c, c], [0.0, -1.0], [c, c]];
            let mut corners = Vec::new();
            for mask in 0..16u32 {
                let mut v = [0.0f64; 2];
                for (j, g) in generators.iter().enumerate() {
                    let sign = if mask & (1 << j) != 0 { 0.5 } else { -0.5 };
                    v[0] += sign * g[0];
                    v[1] += sign * g[1];
                }
                corners.push(v);
            }
            let vertices = convex_hull(&corners);
            let window = Window { kind: WindowKind::Polygon { vertices }, regular: true };
            let mut scheme =
                CutProjectScheme::new(2, 2, basis, window, CheckBounds::default())?;
            scheme.description = "octagonal".into();
            Ok(scheme)
        }
        other => Err(Error::UnknownBuiltin(other.into())),
    }
}

/// Andrew monotone chain; returns a strictly convex ccw hull.
fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let build = |iter: &mut dyn Iterator<Item = [f64; 2]>| {
        let mut half: Vec<[f64; 2]> = Vec::new();
        for p in iter {
            while half.len() >= 2 && cross(half[half.len() - 2], half[half.len() - 1], p) <= 1e-12
            {
                half.pop();
            }
            half.push(p);
        }
        half.pop();
        half
    };
    let mut hull = build(&mut pts.iter().copied());
    hull.extend(build(&mut pts.iter().rev().copied()));
    hull
}
