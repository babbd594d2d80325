//! Hull metric, the torus dynamical system of a scheme, and uniform
//! averaging of twisted translates.
//!
//! Two Delone sets are close when, after translations of size at most
//! `eps`, they agree on the ball of radius `1/eps`; the metric caps at
//! `1/sqrt 2`. The torus `T = R^(N+m)/L~` of a scheme carries the
//! translation action in lattice coordinates, and trigonometric
//! polynomials on `T` admit closed-form volume averages of their twisted
//! translates, giving both an averaging operator and an analytic
//! projection oracle for the invariant part.

use num_complex::Complex64;
use serde::Deserialize;

use crate::cps::CutProjectScheme;
use crate::error::{Error, Result};
use crate::geom::{self, ball_volume};
use crate::pointset::PointSet;

const METRIC_CAP: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Multiset agreement of two windows with a tiny boundary band excluded.
fn windows_agree(
    a_points: &[Vec<f64>],
    a_shift: &[f64],
    b_points: &[Vec<f64>],
    b_shift: &[f64],
    window: f64,
    tol: f64,
) -> bool {
    let band = 10.0 * tol;
    let collect = |points: &[Vec<f64>], shift: &[f64]| -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = points
            .iter()
            .map(|p| geom::sub(p, shift))
            .filter(|p| geom::norm(p) <= window - band)
            .collect();
        out.sort_by(|x, y| {
            x.iter()
                .zip(y)
                .map(|(a, b)| a.partial_cmp(b).unwrap())
                .find(|o| *o != std::cmp::Ordering::Equal)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        out
    };
    let a = collect(a_points, a_shift);
    let b = collect(b_points, b_shift);
    if a.len() != b.len() {
        return false;
    }
    a.iter().zip(&b).all(|(x, y)| geom::dist(x, y) <= 2.0 * tol)
}

/// Candidate alignment offsets `delta = b - a` between points of the two
/// samples, deduplicated at the matching tolerance.
fn alignment_candidates(
    p1: &PointSet,
    p2: &PointSet,
    max_norm: f64,
    tol: f64,
) -> Vec<Vec<f64>> {
    let grid = crate::geom::NeighborGrid::build(p2.points(), max_norm.max(1e-9));
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; p1.dim()]];
    for a in p1.points() {
        grid.for_each_within(p2.points(), a, max_norm, |j| {
            let delta = geom::sub(&p2.points()[j], a);
            if !out.iter().any(|d| geom::dist(d, &delta) <= tol) {
                out.push(delta);
            }
        });
        if out.len() > 5000 {
            break;
        }
    }
    out
}

fn agreement_at(p1: &PointSet, p2: &PointSet, eps: f64, tol: f64) -> bool {
    let window = 1.0 / eps;
    let candidates = alignment_candidates(p1, p2, 2.0 * eps + 4.0 * tol, tol);
    let dim = p1.dim();
    for delta in candidates {
        // need x with |x| <= eps and |x + delta| <= eps; the midpoint
        // -delta/2 is feasible whenever delta is admissible at all
        if geom::norm(&delta) > 2.0 * eps {
            continue;
        }
        let mid: Vec<f64> = delta.iter().map(|d| -d / 2.0).collect();
        // probe the grid of step eps/50 along each axis around the midpoint
        let step = eps / 50.0;
        let mut probes: Vec<Vec<f64>> = vec![mid.clone()];
        for axis in 0..dim {
            for k in 1..=2i32 {
                for sign in [-1.0, 1.0] {
                    let mut x = mid.clone();
                    x[axis] += sign * k as f64 * step;
                    let y: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
                    if geom::norm(&x) <= eps && geom::norm(&y) <= eps {
                        probes.push(x);
                    }
                }
            }
        }
        for x in probes {
            let y: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
            if windows_agree(p1.points(), &x, p2.points(), &y, window, tol) {
                return true;
            }
        }
    }
    false
}

fn metric_search(p1: &PointSet, p2: &PointSet, eps_grid: f64) -> Result<f64> {
    let tol = (p1.quantum().min(p2.quantum())).max(1e-13);
    let inradius = p1.region().inradius().min(p2.region().inradius());
    // smallest eps whose window (plus translation room) the samples cover
    let eps_feasible = {
        let mut e = 1.0 / inradius;
        for _ in 0..8 {
            e = 1.0 / (inradius - e);
        }
        e
    };
    let mut lo = 0.0f64;
    let mut hi = METRIC_CAP;
    if eps_feasible > METRIC_CAP {
        return Err(Error::InsufficientSample);
    }
    if !agreement_at(p1, p2, METRIC_CAP, tol) {
        return Ok(METRIC_CAP);
    }
    while hi - lo > eps_grid {
        let mut mid = (lo + hi) / 2.0;
        if mid < eps_feasible {
            // cannot probe below the feasibility floor; probe the floor
            // itself once, then give up if the bracket is still too wide
            if hi <= eps_feasible * (1.0 + 1e-12) {
                return Err(Error::InsufficientSample);
            }
            mid = eps_feasible;
        }
        if agreement_at(p1, p2, mid, tol) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(((lo + hi) / 2.0).min(METRIC_CAP))
}

/// The hull metric between two sampled Delone sets, bracketed to
/// `eps_grid` by bisection and capped at `1/sqrt 2`. Symmetric by
/// construction.
pub fn hull_metric(p1: &PointSet, p2: &PointSet, eps_grid: f64) -> Result<f64> {
    if p1.dim() != p2.dim() {
        return Err(Error::Config("dimension mismatch".into()));
    }
    if eps_grid.is_nan() || eps_grid <= 0.0 {
        return Err(Error::Config("eps_grid must be positive".into()));
    }
    let a = metric_search(p1, p2, eps_grid)?;
    let b = metric_search(p2, p1, eps_grid)?;
    Ok(a.min(b))
}

/// The torus `R^(N+m)/L~` in lattice coordinates, with the physical
/// translation action `v -> v + B^{-1}(t, 0) mod 1`.
#[derive(Debug, Clone)]
pub struct TorusSystem {
    basis_inv: nalgebra::DMatrix<f64>,
    dual_t: nalgebra::DMatrix<f64>,
    phys_dim: usize,
    total_dim: usize,
}

impl TorusSystem {
    pub fn from_scheme(cps: &CutProjectScheme) -> Self {
        TorusSystem {
            basis_inv: cps.basis_inv().clone(),
            dual_t: cps.basis_inv().transpose() * (2.0 * std::f64::consts::PI),
            phys_dim: cps.phys_dim(),
            total_dim: cps.total_dim(),
        }
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Lattice-coordinate displacement of the physical translation `t`.
    pub fn displacement(&self, t: &[f64]) -> Vec<f64> {
        let mut padded = vec![0.0; self.total_dim];
        padded[..self.phys_dim].copy_from_slice(t);
        let v = &self.basis_inv * nalgebra::DVector::from_column_slice(&padded);
        v.iter().copied().collect()
    }

    /// `alpha_t(v) = v + B^{-1}(t, 0) mod 1`.
    pub fn act(&self, t: &[f64], v: &[f64]) -> Vec<f64> {
        let d = self.displacement(t);
        v.iter()
            .zip(&d)
            .map(|(a, b)| (a + b).rem_euclid(1.0))
            .collect()
    }

    /// Physical frequency of the torus character `e_q`:
    /// `theta_q = (2 pi B^{-T} q)_phys`, so that
    /// `e_q(alpha_{-t} v) = e_q(v) exp(-i theta_q . t)`.
    pub fn character_frequency(&self, q: &[i64]) -> Vec<f64> {
        let qv = nalgebra::DVector::from_iterator(q.len(), q.iter().map(|&x| x as f64));
        let v = &self.dual_t * qv;
        v.iter().take(self.phys_dim).copied().collect()
    }
}

/// The beta-address of the model set `t + ⋏(W - h)` on the torus of the
/// scheme: `B^{-1}(t, h) mod 1`.
pub fn torus_address(cps: &CutProjectScheme, t: &[f64], h: &[f64]) -> Vec<f64> {
    let d = cps.total_dim();
    let mut padded = vec![0.0; d];
    padded[..cps.phys_dim()].copy_from_slice(t);
    padded[cps.phys_dim()..].copy_from_slice(h);
    let v = cps.basis_inv() * nalgebra::DVector::from_column_slice(&padded);
    v.iter().map(|x| x.rem_euclid(1.0)).collect()
}

/// Finite trigonometric polynomial on the torus:
/// `f(v) = sum_q coeff_q exp(2 pi i q . v)`.
#[derive(Debug, Clone)]
pub struct TrigPolynomial {
    pub terms: Vec<(Vec<i64>, Complex64)>,
}

#[derive(Debug, Deserialize)]
struct TermConfig {
    q: Vec<i64>,
    re: f64,
    #[serde(default)]
    im: f64,
}

impl TrigPolynomial {
    pub fn new(terms: Vec<(Vec<i64>, Complex64)>) -> Self {
        TrigPolynomial { terms }
    }

    /// Parses the terms file format: `[{"q":[1,0],"re":1.0,"im":0.0}]`.
    pub fn from_json(json: &str) -> Result<Self> {
        let configs: Vec<TermConfig> = serde_json::from_str(json)?;
        Ok(TrigPolynomial {
            terms: configs
                .into_iter()
                .map(|c| (c.q, Complex64::new(c.re, c.im)))
                .collect(),
        })
    }

    pub fn eval(&self, v: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(q, coeff)| {
                let phase: f64 = q.iter().zip(v).map(|(&qi, &vi)| qi as f64 * vi).sum();
                coeff * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
            })
            .sum()
    }

    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).sum()
    }
}

/// Character cocycle `phi_xi(t, omega) = exp(i xi . t)`.
#[derive(Debug, Clone)]
pub struct Cocycle {
    pub xi: Vec<f64>,
}

impl Cocycle {
    pub fn character(xi: Vec<f64>) -> Self {
        Cocycle { xi }
    }

    pub fn eval(&self, t: &[f64]) -> Complex64 {
        Complex64::from_polar(1.0, geom::dot(&self.xi, t))
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Volume average of the twisted translates,
/// `A_n f(omega) = (1/vol B_n) int_{B_n} phi(t, omega) f(alpha_{-t} omega) dt`.
///
/// `quad_step = None` selects the exact per-term closed form in one
/// physical dimension (each term integrates to a sinc) and a default
/// midpoint step otherwise. An explicit step runs the midpoint rule on the
/// full integrand; it must resolve the fastest phase to 0.1 rad per step.
pub fn ww_average(
    ts: &TorusSystem,
    f: &TrigPolynomial,
    c: &Cocycle,
    omega: &[f64],
    n: f64,
    quad_step: Option<f64>,
) -> Result<Complex64> {
    match quad_step {
        None if ts.phys_dim() == 1 => Ok(ww_average_closed(ts, f, c, omega, n)),
        None => {
            let rate = max_phase_rate(ts, f, c);
            ww_average_midpoint(ts, f, c, omega, n, 0.1 / rate.max(1e-9))
        }
        Some(h) => {
            let rate = max_phase_rate(ts, f, c);
            if h * rate > 0.1 * (1.0 + 1e-9) {
                return Err(Error::QuadratureStep(format!(
                    "step {h} resolves {:.3} rad per step; the rule allows 0.1",
                    h * rate
                )));
            }
            ww_average_midpoint(ts, f, c, omega, n, h)
        }
    }
}

fn max_phase_rate(ts: &TorusSystem, f: &TrigPolynomial, c: &Cocycle) -> f64 {
    let xi_norm = geom::norm(&c.xi);
    f.terms
        .iter()
        .map(|(q, _)| xi_norm + geom::norm(&ts.character_frequency(q)))
        .fold(xi_norm, f64::max)
}

/// Closed form in one physical dimension: term `q` contributes
/// `coeff e_q(omega) sinc((xi - theta_q) n)`.
fn ww_average_closed(
    ts: &TorusSystem,
    f: &TrigPolynomial,
    c: &Cocycle,
    omega: &[f64],
    n: f64,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (q, coeff) in &f.terms {
        let theta = ts.character_frequency(q)[0];
        let kappa = c.xi[0] - theta;
        let phase: f64 = q.iter().zip(omega).map(|(&qi, &vi)| qi as f64 * vi).sum();
        acc += coeff
            * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
            * sinc(kappa * n);
    }
    acc
}

fn ww_average_midpoint(
    ts: &TorusSystem,
    f: &TrigPolynomial,
    c: &Cocycle,
    omega: &[f64],
    n: f64,
    h: f64,
) -> Result<Complex64> {
    let dim = ts.phys_dim();
    let volume = ball_volume(dim, n);
    let steps = ((2.0 * n) / h).ceil() as usize;
    if steps == 0 {
        return Err(Error::QuadratureStep("empty quadrature".into()));
    }
    let h_eff = 2.0 * n / steps as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    match dim {
        1 => {
            for i in 0..steps {
                let t = [-n + (i as f64 + 0.5) * h_eff];
                let shifted = ts.act(&[-t[0]], omega);
                acc += c.eval(&t) * f.eval(&shifted) * h_eff;
            }
        }
        2 => {
            for i in 0..steps {
                for j in 0..steps {
                    let t = [-n + (i as f64 + 0.5) * h_eff, -n + (j as f64 + 0.5) * h_eff];
                    if geom::norm(&t) > n {
                        continue;
                    }
                    let neg = [-t[0], -t[1]];
                    let shifted = ts.act(&neg, omega);
                    acc += c.eval(&t) * f.eval(&shifted) * h_eff * h_eff;
                }
            }
        }
        other => {
            return Err(Error::Config(format!(
                "midpoint averaging supports physical dimension 1 or 2, got {other}"
            )))
        }
    }
    Ok(acc / volume)
}

/// Analytic projection oracle: keeps exactly the resonant terms, those
/// whose character frequency matches the cocycle frequency to 1e-10
/// componentwise. On the minimal torus system the invariant subspace of
/// the twisted translation is spanned by these characters.
pub fn ww_projection(ts: &TorusSystem, f: &TrigPolynomial, c: &Cocycle) -> TrigPolynomial {
    let terms = f
        .terms
        .iter()
        .filter(|(q, _)| {
            let theta = ts.character_frequency(q);
            theta
                .iter()
                .zip(&c.xi)
                .all(|(a, b)| (a - b).abs() <= 1e-10)
        })
        .cloned()
        .collect();
    TrigPolynomial { terms }
}

/// Supremum deviation `max_omega |A_n f(omega) - P f(omega)|` for each
/// averaging radius; a sequence decreasing to zero is the finite witness
/// of uniform convergence.
pub fn ww_uniform_test(
    ts: &TorusSystem,
    f: &TrigPolynomial,
    c: &Cocycle,
    omega_samples: &[Vec<f64>],
    n_list: &[f64],
    quad_step: Option<f64>,
) -> Result<Vec<(f64, f64)>> {
    if omega_samples.is_empty() {
        return Err(Error::Config("need at least one omega sample".into()));
    }
    let projection = ww_projection(ts, f, c);
    n_list
        .iter()
        .map(|&n| {
            let mut sup = 0.0f64;
            for omega in omega_samples {
                let avg = ww_average(ts, f, c, omega, n, quad_step)?;
                sup = sup.max((avg - projection.eval(omega)).norm());
            }
            Ok((n, sup))
        })
        .collect()
}

/// Deterministic grid of `per_dim^dim` torus points, offset to midcells.
pub fn torus_grid(dim: usize, per_dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(per_dim.pow(dim as u32));
    let mut idx = vec![0usize; dim];
    loop {
        out.push(
            idx.iter()
                .map(|&i| (i as f64 + 0.5) / per_dim as f64)
                .collect(),
        );
        let mut d = 0;
        loop {
            if d == dim {
                return out;
            }
            idx[d] += 1;
            if idx[d] < per_dim {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}
