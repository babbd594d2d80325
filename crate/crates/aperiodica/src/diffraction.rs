//! Bragg amplitudes, peak scans, closed-form model-set intensities, the
//! smoothing-kernel consistency identity, and symmetry checks.
//!
//! The averaged exponential sum
//! `c_S(xi) = (1/vol B_S) sum_{x in B_S} exp(-i xi . x)` estimates the
//! square root of the peak intensity at `xi`; for regular model sets the
//! closed form `A_k = |int_W exp(i k* . y) dy|^2 / covol^2` is available at
//! every Fourier-module element and the two routes are compared in the
//! acceptance suite. Conventions are fixed at the crate root.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::autocorr::WeightedComb;
use crate::cps::{CutProjectScheme, FourierModule, ModuleElement};
use crate::error::{Error, Result};
use crate::geom::{self, ball_volume};
use crate::pointset::PointSet;

/// A Bombieri/Taylor amplitude: the averaged wave sum at one frequency.
#[derive(Debug, Clone)]
pub struct BTAmplitude {
    pub xi: Vec<f64>,
    /// Averaging radius.
    pub s: f64,
    pub value: Complex64,
}

impl BTAmplitude {
    /// `|c_S(xi)|^2`, the intensity estimate.
    pub fn intensity(&self) -> f64 {
        self.value.norm_sqr()
    }
}

/// One candidate frequency with its measured (and, when available,
/// closed-form) intensity.
#[derive(Debug, Clone)]
pub struct PeakEntry {
    pub xi: Vec<f64>,
    /// `|c_S(xi)|^2` at the largest averaging radius.
    pub intensity_bt: f64,
    /// Closed-form model-set intensity `A_k`, when the candidate comes
    /// from a Fourier module.
    pub intensity_closed: Option<f64>,
    /// Dual-lattice coordinate of the candidate, when known.
    pub q_label: Option<Vec<i64>>,
    /// `|c_S(xi)|^2` for every radius in `PeakList::s_used`.
    pub bt_history: Vec<f64>,
}

/// Scan result over a candidate list, sorted by `|xi|`.
#[derive(Debug, Clone)]
pub struct PeakList {
    pub entries: Vec<PeakEntry>,
    /// Averaging radii used, increasing; intensities quote the last one.
    pub s_used: Vec<f64>,
    /// Physical frequency cutoff of the candidate set, when applicable.
    pub kmax: Option<f64>,
    /// Internal frequency cutoff, when the candidates come from a module.
    pub kintmax: Option<f64>,
    /// `|window transform|` at the internal cutoff: the size of what the
    /// module enumeration may have missed.
    pub tail_bound: Option<f64>,
}

impl PeakList {
    /// Entries sorted by decreasing measured intensity.
    pub fn top_by_intensity(&self, count: usize) -> Vec<&PeakEntry> {
        let mut refs: Vec<&PeakEntry> = self.entries.iter().collect();
        refs.sort_by(|a, b| b.intensity_bt.partial_cmp(&a.intensity_bt).unwrap());
        refs.truncate(count);
        refs
    }
}

/// The exact finite wave sum over the sample ball.
pub fn bt_amplitude(p: &PointSet, xi: &[f64], s: f64) -> Result<BTAmplitude> {
    if s > p.region().inradius() + 1e-12 {
        return Err(Error::RegionTooSmall(format!(
            "averaging radius {s} exceeds the region inradius {}",
            p.region().inradius()
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for x in p.points() {
        if geom::norm(x) <= s {
            acc += Complex64::from_polar(1.0, -geom::dot(xi, x));
        }
    }
    Ok(BTAmplitude {
        xi: xi.to_vec(),
        s,
        value: acc / ball_volume(p.dim(), s),
    })
}

/// Frequency, optional dual-lattice label, optional closed intensity.
type Candidate = (Vec<f64>, Option<Vec<i64>>, Option<f64>);

fn scan_candidates(
    p: &PointSet,
    candidates: Vec<Candidate>,
    s_list: &[f64],
) -> Result<Vec<PeakEntry>> {
    let mut s_used: Vec<f64> = s_list.to_vec();
    s_used.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if let Some(&s_max) = s_used.last() {
        if s_max > p.region().inradius() + 1e-12 {
            return Err(Error::RegionTooSmall(format!(
                "averaging radius {s_max} exceeds the region"
            )));
        }
    }
    let mut entries: Vec<PeakEntry> = candidates
        .into_par_iter()
        .map(|(xi, q_label, intensity_closed)| {
            let bt_history: Vec<f64> = s_used
                .iter()
                .map(|&s| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for x in p.points() {
                        if geom::norm(x) <= s {
                            acc += Complex64::from_polar(1.0, -geom::dot(&xi, x));
                        }
                    }
                    (acc / ball_volume(p.dim(), s)).norm_sqr()
                })
                .collect();
            PeakEntry {
                xi,
                intensity_bt: *bt_history.last().unwrap_or(&0.0),
                intensity_closed,
                q_label,
                bt_history,
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        geom::norm(&a.xi)
            .partial_cmp(&geom::norm(&b.xi))
            .unwrap()
            .then_with(|| {
                a.xi.iter()
                    .zip(&b.xi)
                    .map(|(x, y)| x.partial_cmp(y).unwrap())
                    .find(|o| *o != std::cmp::Ordering::Equal)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    Ok(entries)
}

/// Measures `|c_S(xi)|^2` for an explicit candidate list (e.g. a uniform
/// grid for a continuous-background scan), retaining the whole `s`
/// sequence for convergence reporting.
pub fn peak_scan(p: &PointSet, candidates: &[Vec<f64>], s_list: &[f64]) -> Result<PeakList> {
    let entries = scan_candidates(
        p,
        candidates.iter().map(|xi| (xi.clone(), None, None)).collect(),
        s_list,
    )?;
    let mut s_used = s_list.to_vec();
    s_used.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(PeakList { entries, s_used, kmax: None, kintmax: None, tail_bound: None })
}

/// Closed-form intensity of a Fourier-module element:
/// `A_k = |int_W exp(i k* . y) dy|^2 / covol^2` (the covolume square
/// restores the unit-covolume normalization in user coordinates).
pub fn model_set_intensity(cps: &CutProjectScheme, element: &ModuleElement) -> f64 {
    let transform = cps.window().fourier(&element.k_star);
    transform.norm_sqr() / (cps.covolume() * cps.covolume())
}

/// Measures every candidate of a Fourier module against the sample and
/// attaches the closed-form intensities; records the window-transform
/// tail bound at the internal cutoff.
pub fn scan_module(
    p: &PointSet,
    cps: &CutProjectScheme,
    module: &FourierModule,
    kmax: f64,
    kintmax: f64,
    s_list: &[f64],
) -> Result<PeakList> {
    let candidates: Vec<Candidate> = module
        .elements
        .iter()
        .map(|e| {
            (
                e.k.clone(),
                Some(e.q.clone()),
                Some(model_set_intensity(cps, e)),
            )
        })
        .collect();
    let entries = scan_candidates(p, candidates, s_list)?;
    let mut s_used = s_list.to_vec();
    s_used.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // tail bound: |window transform| probed on the internal cutoff sphere
    let m = cps.int_dim();
    let tail = (0..m)
        .map(|j| {
            let mut k_star = vec![0.0; m];
            k_star[j] = kintmax;
            cps.window().fourier(&k_star).norm()
        })
        .fold(0.0f64, f64::max)
        / cps.covolume();
    Ok(PeakList {
        entries,
        s_used,
        kmax: Some(kmax),
        kintmax: Some(kintmax),
        tail_bound: Some(tail),
    })
}

/// Golden-section refinement of a 1D peak position inside
/// `[xi - step, xi + step]`, maximizing the measured intensity.
pub fn refine_peak(p: &PointSet, xi: f64, step: f64, s: f64) -> Result<(f64, f64)> {
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut a = xi - step;
    let mut b = xi + step;
    let f = |x: f64| -> Result<f64> { Ok(bt_amplitude(p, &[x], s)?.intensity()) };
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..60 {
        if (b - a).abs() < 1e-12 * (1.0 + xi.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d)?;
        }
    }
    let x = (a + b) / 2.0;
    Ok((x, f(x)?))
}

/// Compactly supported smoothing kernel with unit integral and a closed
/// Fourier transform; multi-dimensional kernels are coordinate products.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingKernel {
    pub shape: KernelShape,
    /// Half-width of the support `[-width, width]` per coordinate.
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelShape {
    /// `(1 - |x|/w)/w`; transform `sinc^2(xi w / 2)`.
    Triangular,
    /// `(1 + cos(pi x/w))/(2w)`; transform
    /// `sinc(xi w) pi^2 / (pi^2 - (xi w)^2)`.
    RaisedCosine,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl SmoothingKernel {
    pub fn triangular(width: f64) -> Self {
        SmoothingKernel { shape: KernelShape::Triangular, width }
    }

    pub fn raised_cosine(width: f64) -> Self {
        SmoothingKernel { shape: KernelShape::RaisedCosine, width }
    }

    fn transform_1d(&self, xi: f64) -> f64 {
        let w = self.width;
        match self.shape {
            KernelShape::Triangular => {
                let s = sinc(xi * w / 2.0);
                s * s
            }
            KernelShape::RaisedCosine => {
                let u = (xi * w).abs();
                let pi = std::f64::consts::PI;
                if (u - pi).abs() < 0.1 {
                    // remove the 0/0 at u = pi: sin(u) = sin(pi - u)
                    sinc(pi - u) * pi * pi / (u * (pi + u))
                } else {
                    sinc(u) * pi * pi / (pi * pi - u * u)
                }
            }
        }
    }

    /// The real transform `F(phi)(xi) = int phi(x) exp(-i xi . x) dx`
    /// (even kernels have real transforms).
    pub fn transform(&self, xi: &[f64]) -> f64 {
        xi.iter().map(|&x| self.transform_1d(x)).product()
    }

    fn autoconv_1d(&self, t: f64) -> f64 {
        let w = self.width;
        let u = t.abs() / w;
        if u >= 2.0 {
            return 0.0;
        }
        match self.shape {
            KernelShape::Triangular => {
                if u <= 1.0 {
                    (2.0 / 3.0 - u * u + u * u * u / 2.0) / w
                } else {
                    let v = 2.0 - u;
                    v * v * v / 6.0 / w
                }
            }
            KernelShape::RaisedCosine => {
                let a = std::f64::consts::PI / w;
                let t = u * w;
                ((2.0 * w - t) * (1.0 + 0.5 * (a * t).cos())
                    + 1.5 / a * (a * t).sin())
                    / (4.0 * w * w)
            }
        }
    }

    /// The autoconvolution `(phi * phi~)(t)`; support `[-2w, 2w]` per
    /// coordinate.
    pub fn autoconv(&self, t: &[f64]) -> f64 {
        t.iter().map(|&x| self.autoconv_1d(x)).product()
    }

    /// Frequency beyond which `|transform|^2` is guaranteed below `1e-6`
    /// of its maximum (envelope bound).
    pub fn required_bandwidth(&self) -> f64 {
        match self.shape {
            // sinc^4(u) <= u^{-4} < 1e-6  =>  u = xi w/2 >= 10^{1.5}
            KernelShape::Triangular => 2.0 * 10f64.powf(1.5) / self.width,
            // |transform|^2 ~ (pi^2/u^3)^2 < 1e-6 => u >= (pi^4 1e6)^{1/6}
            KernelShape::RaisedCosine => {
                (std::f64::consts::PI.powi(4) * 1e6).powf(1.0 / 6.0) / self.width
            }
        }
    }
}

/// Numerical test of the pure-point consistency identity: the kernel-smoothed
/// autocorrelation at zero against the peak-sum route.
///
/// `lhs = (gamma * phi * phi~)(0)` from the comb weights and the kernel
/// autoconvolution; `rhs = sum_peaks I(xi) |F(phi)(xi)|^2` (closed-form
/// intensities preferred when present). Small relative error is numerical
/// evidence of pure point diffraction.
pub fn pure_point_consistency(
    p: &PointSet,
    peaks: &PeakList,
    kernel: &SmoothingKernel,
    comb: &WeightedComb,
) -> Result<(f64, f64, f64)> {
    let packing = p.min_gap() / 2.0;
    if kernel.width.is_nan() || kernel.width >= packing {
        return Err(Error::Config(format!(
            "kernel width {} must stay below the packing radius {packing}",
            kernel.width
        )));
    }
    if comb.s_max < 2.0 * kernel.width {
        return Err(Error::Config(
            "comb support does not cover the kernel autoconvolution".into(),
        ));
    }
    let needed = kernel.required_bandwidth();
    let covered = peaks
        .entries
        .iter()
        .map(|e| geom::norm(&e.xi))
        .fold(0.0f64, f64::max);
    if covered + 1e-9 < needed {
        return Err(Error::Config(format!(
            "peaks cover |xi| <= {covered:.1} but the kernel needs {needed:.1}"
        )));
    }
    let lhs: f64 = comb
        .support
        .iter()
        .zip(&comb.weights)
        .map(|(z, w)| w * kernel.autoconv(z))
        .sum();
    if lhs <= 0.0 {
        return Err(Error::DegenerateKernel { lhs });
    }
    let rhs: f64 = peaks
        .entries
        .iter()
        .map(|e| {
            let intensity = e.intensity_closed.unwrap_or(e.intensity_bt);
            let t = kernel.transform(&e.xi);
            intensity * t * t
        })
        .sum();
    Ok((lhs, rhs, (lhs - rhs).abs() / lhs))
}

/// Per-peak rows of a symmetry comparison.
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    /// `max |I(xi) - I(V xi)|` over the peaks.
    pub max_discrepancy: f64,
    /// `(xi, I(xi), I(V xi))` per peak.
    pub rows: Vec<(Vec<f64>, f64, f64)>,
}

/// Compares peak intensities with the intensities at `V xi`, re-measuring
/// the rotated frequency on the sample; `V` must be orthogonal to 1e-10.
pub fn symmetry_check(
    p: &PointSet,
    peaks: &[PeakEntry],
    v: &DMatrix<f64>,
    s: f64,
) -> Result<SymmetryReport> {
    let dim = p.dim();
    if v.nrows() != dim || v.ncols() != dim {
        return Err(Error::Config(format!("V must be {dim}x{dim}")));
    }
    let gram = v.transpose() * v;
    let eye = DMatrix::<f64>::identity(dim, dim);
    let deviation = (&gram - &eye).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if deviation > 1e-10 {
        return Err(Error::NotOrthogonal { deviation });
    }
    let mut rows = Vec::with_capacity(peaks.len());
    let mut max_discrepancy = 0.0f64;
    for e in peaks {
        let xi = nalgebra::DVector::from_column_slice(&e.xi);
        let rotated = v * xi;
        let rotated: Vec<f64> = rotated.iter().copied().collect();
        let i_rot = bt_amplitude(p, &rotated, s)?.intensity();
        max_discrepancy = max_discrepancy.max((e.intensity_bt - i_rot).abs());
        rows.push((e.xi.clone(), e.intensity_bt, i_rot));
    }
    Ok(SymmetryReport { max_discrepancy, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autocorr::{autocorr, Estimator};
    use crate::cps::{builtin, TAU};
    use crate::pointset::tests::integer_lattice;
    use crate::sequence;
    use std::collections::BTreeMap;
    use std::f64::consts::PI;

    #[test]
    fn lattice_bragg_amplitude() {
        // oracle: every term of the sum is 1 at xi = 2 pi k, so
        // c = (2S+1)/(2S) exactly
        let p = integer_lattice(200);
        let amp = bt_amplitude(&p, &[2.0 * PI], 200.0).unwrap();
        let expect = 401.0 / 400.0;
        assert!((amp.intensity() - expect * expect).abs() < 1e-10);
        assert!((amp.intensity() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn amplitude_at_zero_is_the_density() {
        let p = builtin("fibonacci").unwrap().model_set_points(150.0).unwrap();
        let amp = bt_amplitude(&p, &[0.0], 150.0).unwrap();
        let in_ball = p.points().len() as f64;
        assert_eq!(amp.value.re, in_ball / 300.0);
        assert_eq!(amp.value.im, 0.0);
    }

    #[test]
    fn alternating_sum_is_small() {
        let p = integer_lattice(100);
        let amp = bt_amplitude(&p, &[PI], 100.0).unwrap();
        // oracle: sum of (-1)^x over x = -100..=100 is 1
        assert!(amp.value.norm() <= 2.0 / 200.0);
    }

    #[test]
    fn lattice_grid_scan_peaks_only_near_the_dual() {
        let p = integer_lattice(500);
        let candidates: Vec<Vec<f64>> = (0..=500).map(|i| vec![i as f64 * 0.02]).collect();
        let peaks = peak_scan(&p, &candidates, &[500.0]).unwrap();
        for e in &peaks.entries {
            let xi = e.xi[0];
            let dist = (xi / (2.0 * PI) - (xi / (2.0 * PI)).round()).abs() * 2.0 * PI;
            if dist > 0.05 {
                assert!(
                    e.intensity_bt <= 0.01,
                    "off-peak intensity {} at xi = {xi}",
                    e.intensity_bt
                );
            }
        }
    }

    #[test]
    fn empty_candidates_give_empty_list() {
        let p = integer_lattice(10);
        let peaks = peak_scan(&p, &[], &[10.0]).unwrap();
        assert!(peaks.entries.is_empty());
    }

    #[test]
    fn module_intensities_match_measurement() {
        let scheme = builtin("fibonacci").unwrap();
        let p = scheme.model_set_points(2000.0).unwrap();
        let module = scheme.fourier_module(12.0, 12.0);
        let peaks = scan_module(&p, &scheme, &module, 12.0, 12.0, &[2000.0]).unwrap();
        let a0 = scheme.density() * scheme.density();
        for e in &peaks.entries {
            let closed = e.intensity_closed.unwrap();
            assert!(closed >= 0.0);
            assert!(
                (e.intensity_bt - closed).abs() / a0 <= 5e-2,
                "xi = {:?}: measured {} vs closed {closed}",
                e.xi,
                e.intensity_bt
            );
        }
        // zero frequency carries density^2
        let zero = &peaks.entries[0];
        assert!(geom::norm(&zero.xi) < 1e-12);
        assert!((zero.intensity_closed.unwrap() - a0).abs() < 1e-12);
    }

    #[test]
    fn extinct_candidates_measure_dark() {
        // q = (-j, -3j) has k* = 2 pi j / tau, a zero of the window
        // transform; the measured intensity must vanish with S
        let scheme = builtin("fibonacci").unwrap();
        let p = scheme.model_set_points(2000.0).unwrap();
        let module = scheme.fourier_module(22.0, 16.0);
        let extinct: Vec<&crate::cps::ModuleElement> = module
            .elements
            .iter()
            .filter(|e| model_set_intensity(&scheme, e) < 1e-12)
            .collect();
        assert!(!extinct.is_empty(), "no extinction candidates in range");
        for e in extinct {
            let amp = bt_amplitude(&p, &e.k, 2000.0).unwrap();
            assert!(
                amp.intensity() <= 1e-3,
                "extinct candidate {:?} measured {}",
                e.q,
                amp.intensity()
            );
        }
    }

    #[test]
    fn kernel_transforms_and_autoconvolutions() {
        let tri = SmoothingKernel::triangular(0.3);
        assert!((tri.transform(&[0.0]) - 1.0).abs() < 1e-15);
        assert!((tri.autoconv(&[0.0]) - 2.0 / (3.0 * 0.3)).abs() < 1e-12);
        assert_eq!(tri.autoconv(&[0.61]), 0.0);

        let hann = SmoothingKernel::raised_cosine(0.3);
        assert!((hann.transform(&[0.0]) - 1.0).abs() < 1e-12);
        assert!((hann.autoconv(&[0.0]) - 3.0 / (4.0 * 0.3)).abs() < 1e-12);
        // transform at the removable singularity u = pi
        let at_pi = hann.transform(&[PI / 0.3]);
        assert!((at_pi - 0.5).abs() < 1e-10, "Hann transform at pi: {at_pi}");
        // numeric cross-check of the autoconvolution by midpoint quadrature
        let w = 0.3;
        let phi = |x: f64| {
            if x.abs() >= w {
                0.0
            } else {
                (1.0 + (PI * x / w).cos()) / (2.0 * w)
            }
        };
        for t in [0.05, 0.21, 0.4, 0.55] {
            let steps = 20000;
            let h = 2.0 * w / steps as f64;
            let quad: f64 = (0..steps)
                .map(|i| {
                    let x = -w + (i as f64 + 0.5) * h;
                    phi(x) * phi(x - t) * h
                })
                .sum();
            assert!(
                (hann.autoconv(&[t]) - quad).abs() < 1e-6,
                "autoconv({t}) = {} vs quadrature {quad}",
                hann.autoconv(&[t])
            );
        }
    }

    #[test]
    fn lattice_consistency_identity() {
        // Poisson-summation consistency on the integer lattice
        let p = integer_lattice(1000);
        let kernel = SmoothingKernel::triangular(0.3);
        let comb = autocorr(&p, 999.0, 1.0, Estimator::Anchored).unwrap();
        let needed = kernel.required_bandwidth();
        let k_count = (needed / (2.0 * PI)).ceil() as i64 + 1;
        let candidates: Vec<Vec<f64>> = (-k_count..=k_count)
            .map(|k| vec![2.0 * PI * k as f64])
            .collect();
        let peaks = peak_scan(&p, &candidates, &[1000.0]).unwrap();
        let (lhs, rhs, rel) = pure_point_consistency(&p, &peaks, &kernel, &comb).unwrap();
        assert!(rel <= 1e-2, "lhs {lhs} rhs {rhs} rel {rel}");
    }

    #[test]
    fn random_tiling_fails_the_identity() {
        let word = sequence::random_word(3000, 0xfeed, 0.5);
        let lengths = BTreeMap::from([('a', 1.0), ('b', std::f64::consts::SQRT_2)]);
        let p = sequence::seq_to_delone(&word, &lengths).unwrap();
        let kernel = SmoothingKernel::triangular(0.2);
        let inr = p.region().inradius();
        let comb = autocorr(&p, inr - 1.0, 1.0, Estimator::Anchored).unwrap();
        let needed = kernel.required_bandwidth();
        let candidates: Vec<Vec<f64>> = (0..2000)
            .map(|i| vec![(i as f64 - 1000.0) * needed / 1000.0])
            .collect();
        let peaks = peak_scan(&p, &candidates, &[inr - 1.0]).unwrap();
        let (_, _, rel) = pure_point_consistency(&p, &peaks, &kernel, &comb).unwrap();
        assert!(rel >= 0.2, "continuous spectrum must break the identity: rel = {rel}");
    }

    #[test]
    fn conjugation_symmetry_is_exact() {
        let p = builtin("fibonacci").unwrap().model_set_points(300.0).unwrap();
        for xi in [0.7, 2.4, 2.0 * PI * (TAU - 1.0) / 5.0f64.sqrt()] {
            let a = bt_amplitude(&p, &[xi], 300.0).unwrap();
            let b = bt_amplitude(&p, &[-xi], 300.0).unwrap();
            assert_eq!(a.intensity(), b.intensity());
        }
    }

    #[test]
    fn negation_symmetry_check_is_exact() {
        let p = builtin("fibonacci").unwrap().model_set_points(400.0).unwrap();
        let candidates: Vec<Vec<f64>> = (1..40).map(|i| vec![i as f64 * 0.17]).collect();
        let peaks = peak_scan(&p, &candidates, &[400.0]).unwrap();
        let v = DMatrix::from_row_slice(1, 1, &[-1.0]);
        let report = symmetry_check(&p, &peaks.entries, &v, 400.0).unwrap();
        assert_eq!(report.max_discrepancy, 0.0);
    }

    #[test]
    fn square_lattice_fourfold_symmetry() {
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for i in -40i64..=40 {
            for j in -40i64..=40 {
                let x = [i as f64, j as f64];
                if geom::norm(&x) <= 40.0 {
                    points.push(x.to_vec());
                    labels.push(vec![i, j]);
                }
            }
        }
        let p = PointSet::new(
            2,
            points,
            crate::geom::Region::Ball { radius: 40.0 },
            Some(labels),
            "Z^2",
        )
        .unwrap();
        let candidates: Vec<Vec<f64>> = vec![
            vec![2.0 * PI, 0.0],
            vec![0.0, 2.0 * PI],
            vec![2.0 * PI, 2.0 * PI],
            vec![1.3, 0.4],
        ];
        let peaks = peak_scan(&p, &candidates, &[40.0]).unwrap();
        let v = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let report = symmetry_check(&p, &peaks.entries, &v, 40.0).unwrap();
        assert!(report.max_discrepancy <= 1e-2, "{}", report.max_discrepancy);
    }

    #[test]
    fn non_orthogonal_matrix_rejected() {
        let p = integer_lattice(10);
        let peaks = peak_scan(&p, &[vec![1.0]], &[10.0]).unwrap();
        let v = DMatrix::from_row_slice(1, 1, &[0.5]);
        assert!(matches!(
            symmetry_check(&p, &peaks.entries, &v, 10.0),
            Err(Error::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn refine_finds_the_lattice_peak() {
        let p = integer_lattice(300);
        let (xi, intensity) = refine_peak(&p, 6.27, 0.05, 300.0).unwrap();
        assert!((xi - 2.0 * PI).abs() < 1e-4);
        assert!(intensity > 0.99);
    }

    #[test]
    fn off_module_intensity_decays_with_s() {
        // on a model set, grid candidates away from the module decay like
        // 1/S in the averaging radius (record the slope constant)
        let p = builtin("fibonacci").unwrap().model_set_points(3000.0).unwrap();
        let xi = vec![1.0]; // far from any small-denominator module point
        let s_values = [300.0, 1000.0, 3000.0];
        let mut last = f64::INFINITY;
        for s in s_values {
            let i = bt_amplitude(&p, &xi, s).unwrap().intensity();
            assert!(i < last, "intensity should decay with S");
            last = i;
        }
        let i_final = bt_amplitude(&p, &xi, 3000.0).unwrap().intensity();
        assert!(i_final * 3000.0 < 50.0, "recorded decay constant exceeded");
    }
}
