//! C ABI for the aperiodica library.
//!
//! Objects cross the boundary as opaque handles (`ApScheme`, `ApPointSet`,
//! `ApPeakList`) created and freed by paired functions; every fallible
//! call returns an [`ApStatus`] and leaves a human-readable message
//! retrievable with [`ap_last_error`]. The header is generated by cbindgen
//! into `include/aperiodica.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use aperiodica::autocorr::{autocorr_convergence, Estimator};
use aperiodica::cps::{builtin, CutProjectScheme};
use aperiodica::diffraction::{bt_amplitude, scan_module, PeakList};
use aperiodica::pointset::{delone_params, PointSet};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ComputationError = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Opaque cut-and-project scheme handle.
pub struct ApScheme(CutProjectScheme);

/// Opaque point-set handle.
pub struct ApPointSet(PointSet);

/// Opaque peak-list handle.
pub struct ApPeakList(PeakList);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl std::fmt::Display) {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).unwrap_or_default();
    });
}

fn guard<F: FnOnce() -> ApStatus>(f: F) -> ApStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            ApStatus::Panic
        }
    }
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`); returns the full message length in
/// bytes, excluding the terminator.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes, or be null (the
/// call then only reports the length).
#[no_mangle]
pub unsafe extern "C" fn ap_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ap_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

/// Builds a built-in scheme (`"fibonacci"` or `"octagonal"`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be a valid pointer.
/// On success `*out` owns the scheme; release with [`ap_scheme_free`].
#[no_mangle]
pub unsafe extern "C" fn ap_scheme_builtin(
    name: *const c_char,
    out: *mut *mut ApScheme,
) -> ApStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return ApStatus::NullPointer;
        }
        let Some(name) = read_str(name) else {
            set_error("name is null or not UTF-8");
            return ApStatus::InvalidArgument;
        };
        match builtin(name) {
            Ok(scheme) => {
                *out = Box::into_raw(Box::new(ApScheme(scheme)));
                ApStatus::Ok
            }
            Err(e) => {
                set_error(e);
                ApStatus::InvalidArgument
            }
        }
    })
}

/// Builds a scheme from the JSON configuration format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ap_scheme_from_json(
    json: *const c_char,
    out: *mut *mut ApScheme,
) -> ApStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return ApStatus::NullPointer;
        }
        let Some(json) = read_str(json) else {
            set_error("json is null or not UTF-8");
            return ApStatus::InvalidArgument;
        };
        match CutProjectScheme::from_json(json) {
            Ok(scheme) => {
                *out = Box::into_raw(Box::new(ApScheme(scheme)));
                ApStatus::Ok
            }
            Err(e) => {
                set_error(e);
                ApStatus::InvalidArgument
            }
        }
    })
}

/// # Safety
/// `scheme` must come from a scheme constructor and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ap_scheme_free(scheme: *mut ApScheme) {
    if !scheme.is_null() {
        drop(Box::from_raw(scheme));
    }
}

/// # Safety
/// `scheme` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ap_scheme_covolume(
    scheme: *const ApScheme,
    out: *mut f64,
) -> ApStatus {
    guard(|| {
        let (Some(scheme), false) = (scheme.as_ref(), out.is_null()) else {
            set_error("null pointer");
            return ApStatus::NullPointer;
        };
        *out = scheme.0.covolume();
        ApStatus::Ok
    })
}

/// Point density of the model set (window volume over covolume).
///
/// # Safety
/// `scheme` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ap_scheme_density(
    scheme: *const ApScheme,
    out: *mut f64,
) -> ApStatus {
    guard(|| {
        let (Some(scheme), false) = (scheme.as_ref(), out.is_null()) else {
            set_error("null pointer");
            return ApStatus::NullPointer;
        };
        *out = scheme.0.density();
        ApStatus::Ok
    })
}

/// Generates the model set inside the centered ball of `region_radius`.
///
/// # Safety
/// `scheme` must be a live scheme handle; `out` must be a valid pointer.
/// On success `*out` owns the point set; release with
/// [`ap_point_set_free`].
#[no_mangle]
pub unsafe extern "C" fn ap_model_set(
    scheme: *const ApScheme,
    region_radius: f64,
    out: *mut *mut ApPointSet,
) -> ApStatus {
    guard(|| {
        let (Some(scheme), false) = (scheme.as_ref(), out.is_null()) else {
            set_error("null pointer");
            return ApStatus::NullPointer;
        };
        match scheme.0.model_set_points(region_radius) {
            Ok(points) => {
                *out = Box::into_raw(Box::new(ApPointSet(points)));
                ApStatus::Ok
            }
            Err(e) => {
                set_error(e);
                ApStatus::ComputationError
            }
        }
    })
}

/// # Safety
/// `points` must come from [`ap_model_set`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ap_point_set_free(points: *mut ApPointSet) {
    if !points.is_null() {
        drop(Box::from_raw(points));
    }
}

/// Number of points; 0 for a null handle.
///
/// # Safety
/// `points` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ap_point_set_len(points: *const ApPointSet) -> usize {
    points.as_ref().map_or(0, |p| p.0.len())
}

/// Ambient dimension; 0 for a null handle.
///
/// # Safety
/// `points` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ap_point_set_dim(points: *const ApPointSet) -> usize {
    points.as_ref().map_or(0, |p| p.0.dim())
}

/// Copies coordinates row-major (`len * dim` doubles) into `buf`.
///
/// # Safety
/// `points` must be a live handle; `buf` must point to at least `buf_len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ap_point_set_coords(
    points: *const ApPointSet,
    buf: *mut f64,
    buf_len: usize,
) -> ApStatus {
    guard(|| {
        let (Some(points), false) = (points.as_ref(), buf.is_null()) else {
            set_error("null pointer");
            return ApStatus::NullPointer;
        };
        let needed = points.0.len() * points.0.dim();
        if buf_len < needed {
            set_error(format!("buffer holds {buf_len} doubles, need {needed}"));
            return ApStatus::BufferTooSmall;
        }
        let mut cursor = buf;
        for p in points.0.points() {
            for &x in p {
                *cursor = x;
                cursor = cursor.add(1);
            }
        }
        ApStatus::Ok
    })
}

/// Packing and covering radii of the sample; `exact` reports whether the
/// covering value is exact (1) or grid-estimated (0).
///
/// # Safety
/// All pointers must be valid; `points` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ap_delone_params(
    points: *const ApPointSet,
    packing: *mut f64,
    covering: *mut f64,
    exact: *mut i32,
) -> ApStatus {
    guard(|| {
        let (Some(points), false, false, false) = (
            points.as_ref(),
            packing.is_null(),
            covering.is_null(),
            exact.is_null(),
        ) else {
            set_error("null pointer");
            return ApStatus::NullPointer;
        };
        match delone_params(&points.0) {
            Ok(d) => {
                *packing = d.packing_radius;
                *covering = d.covering_radius;
                *exact = i32::from(d.exact);
                ApStatus::Ok
            }
            Err(e) => {
                set_error(e);
                ApStatus::ComputationError
            }
        }
    })
}

/// Anchored autocorrelation coefficient `c_z` at averaging radius `n`.
///
/// # Safety
/// `z` must point to `z_len` doubles; `points` must be a live handle;
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ap_autocorr_coefficient(
    points: *const ApPointSet,
    z: *const f64,
    z_len: usize,
    n: f64,
    out: *mut f64,
) -> ApStatus {
    guard(|| {
        let (Some(points), false, false) = (points.as_ref(), z.is_null(), out.is_null())
        else {
            set_error("null pointer");
            return ApStatus::NullPointer;
        };
        if z_len != points.0.dim() {
            set_error(format!("z has {z_len} components, need {}", points.0.dim()));
            return ApStatus::InvalidArgument;
        }
        let z = std::slice::from_raw_parts(z, z_len);
        match autocorr_convergence(&points.0, &[n], z, Estimator::Anchored) {
            Ok(seq) => {
                *out = seq[0].1;
                ApStatus::Ok
            }
            Err(e) => {
                set_error(e);
                ApStatus::ComputationError
            }
        }
    })
}

/// Measured intensity `|c_S(xi)|^2` on the sample.
///
/// # Safety
/// `xi` must point to `xi_len` doubles; `points` must be a live handle;
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ap_bt_intensity(
    points: *const ApPointSet,
    xi: *const f64,
    xi_len: usize,
    s: f64,
    out: *mut f64,
) -> ApStatus {
    guard(|| {
        let (Some(points), false, false) = (points.as_ref(), xi.is_null(), out.is_null())
        else {
            set_error("null pointer");
            return ApStatus::NullPointer;
        };
        if xi_len != points.0.dim() {
            set_error(format!("xi has {xi_len} components, need {}", points.0.dim()));
            return ApStatus::InvalidArgument;
        }
        let xi = std::slice::from_raw_parts(xi, xi_len);
        match bt_amplitude(&points.0, xi, s) {
            Ok(amp) => {
                *out = amp.intensity();
                ApStatus::Ok
            }
            Err(e) => {
                set_error(e);
                ApStatus::ComputationError
            }
        }
    })
}

/// Generates the model set at `region_radius`, enumerates the Fourier
/// module up to the cutoffs, and measures every candidate.
///
/// # Safety
/// `scheme` must be a live handle; `out` must be valid. On success `*out`
/// owns the peak list; release with [`ap_peak_list_free`].
#[no_mangle]
pub unsafe extern "C" fn ap_diffraction_peaks(
    scheme: *const ApScheme,
    region_radius: f64,
    k_max: f64,
    k_int_max: f64,
    out: *mut *mut ApPeakList,
) -> ApStatus {
    guard(|| {
        let (Some(scheme), false) = (scheme.as_ref(), out.is_null()) else {
            set_error("null pointer");
            return ApStatus::NullPointer;
        };
        let points = match scheme.0.model_set_points(region_radius) {
            Ok(p) => p,
            Err(e) => {
                set_error(e);
                return ApStatus::ComputationError;
            }
        };
        let module = scheme.0.fourier_module(k_max, k_int_max);
        match scan_module(&points, &scheme.0, &module, k_max, k_int_max, &[region_radius]) {
            Ok(peaks) => {
                *out = Box::into_raw(Box::new(ApPeakList(peaks)));
                ApStatus::Ok
            }
            Err(e) => {
                set_error(e);
                ApStatus::ComputationError
            }
        }
    })
}

/// # Safety
/// `peaks` must come from [`ap_diffraction_peaks`] and not have been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ap_peak_list_free(peaks: *mut ApPeakList) {
    if !peaks.is_null() {
        drop(Box::from_raw(peaks));
    }
}

/// Number of peaks; 0 for a null handle.
///
/// # Safety
/// `peaks` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ap_peak_list_len(peaks: *const ApPeakList) -> usize {
    peaks.as_ref().map_or(0, |p| p.0.entries.len())
}

/// Reads one peak: frequency components into `xi` (length `xi_len` must
/// match the physical dimension), the measured intensity, and the
/// closed-form intensity (NaN when unavailable).
///
/// # Safety
/// `peaks` must be a live handle; `xi` must point to `xi_len` writable
/// doubles; `intensity_bt` and `intensity_closed` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ap_peak_list_entry(
    peaks: *const ApPeakList,
    index: usize,
    xi: *mut f64,
    xi_len: usize,
    intensity_bt: *mut f64,
    intensity_closed: *mut f64,
) -> ApStatus {
    guard(|| {
        let (Some(peaks), false, false, false) = (
            peaks.as_ref(),
            xi.is_null(),
            intensity_bt.is_null(),
            intensity_closed.is_null(),
        ) else {
            set_error("null pointer");
            return ApStatus::NullPointer;
        };
        let Some(entry) = peaks.0.entries.get(index) else {
            set_error(format!(
                "index {index} out of range ({} peaks)",
                peaks.0.entries.len()
            ));
            return ApStatus::InvalidArgument;
        };
        if xi_len < entry.xi.len() {
            set_error(format!("xi buffer holds {xi_len}, need {}", entry.xi.len()));
            return ApStatus::BufferTooSmall;
        }
        for (i, &x) in entry.xi.iter().enumerate() {
            *xi.add(i) = x;
        }
        *intensity_bt = entry.intensity_bt;
        *intensity_closed = entry.intensity_closed.unwrap_or(f64::NAN);
        ApStatus::Ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_scheme_through_the_c_abi() {
        unsafe {
            let mut scheme: *mut ApScheme = std::ptr::null_mut();
            let name = CString::new("fibonacci").unwrap();
            assert_eq!(ap_scheme_builtin(name.as_ptr(), &mut scheme), ApStatus::Ok);
            let mut covol = 0.0;
            assert_eq!(ap_scheme_covolume(scheme, &mut covol), ApStatus::Ok);
            assert!((covol - 5.0f64.sqrt()).abs() < 1e-12);

            let mut points: *mut ApPointSet = std::ptr::null_mut();
            assert_eq!(ap_model_set(scheme, 100.0, &mut points), ApStatus::Ok);
            let len = ap_point_set_len(points);
            assert!(len > 100);
            assert_eq!(ap_point_set_dim(points), 1);

            let mut coords = vec![0.0f64; len];
            assert_eq!(
                ap_point_set_coords(points, coords.as_mut_ptr(), coords.len()),
                ApStatus::Ok
            );
            assert!(coords.windows(2).all(|w| w[0] < w[1]));

            let (mut packing, mut covering, mut exact) = (0.0, 0.0, 0);
            assert_eq!(
                ap_delone_params(points, &mut packing, &mut covering, &mut exact),
                ApStatus::Ok
            );
            assert!((packing - 0.5).abs() < 1e-9);
            assert_eq!(exact, 1);

            let mut c1 = 0.0;
            let z = [1.0f64];
            assert_eq!(
                ap_autocorr_coefficient(points, z.as_ptr(), 1, 90.0, &mut c1),
                ApStatus::Ok
            );
            assert!(c1 > 0.2 && c1 < 0.4);

            ap_point_set_free(points);
            ap_scheme_free(scheme);
        }
    }

    #[test]
    fn error_paths_and_messages() {
        unsafe {
            let mut scheme: *mut ApScheme = std::ptr::null_mut();
            let name = CString::new("bogus").unwrap();
            assert_eq!(
                ap_scheme_builtin(name.as_ptr(), &mut scheme),
                ApStatus::InvalidArgument
            );
            let mut buf = vec![0i8; 256];
            let n = ap_last_error(buf.as_mut_ptr(), buf.len());
            assert!(n > 0);
            let message = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
            assert!(message.contains("bogus"), "{message}");

            assert_eq!(
                ap_scheme_builtin(std::ptr::null(), &mut scheme),
                ApStatus::InvalidArgument
            );
            let mut out = 0.0;
            assert_eq!(
                ap_scheme_covolume(std::ptr::null(), &mut out),
                ApStatus::NullPointer
            );
        }
    }

    #[test]
    fn peaks_through_the_c_abi() {
        unsafe {
            let mut scheme: *mut ApScheme = std::ptr::null_mut();
            let name = CString::new("fibonacci").unwrap();
            assert_eq!(ap_scheme_builtin(name.as_ptr(), &mut scheme), ApStatus::Ok);
            let mut peaks: *mut ApPeakList = std::ptr::null_mut();
            assert_eq!(
                ap_diffraction_peaks(scheme, 300.0, 10.0, 10.0, &mut peaks),
                ApStatus::Ok
            );
            let len = ap_peak_list_len(peaks);
            assert!(len > 5);
            let mut max_closed = 0.0f64;
            for i in 0..len {
                let mut xi = [0.0f64];
                let (mut bt, mut closed) = (0.0, 0.0);
                assert_eq!(
                    ap_peak_list_entry(peaks, i, xi.as_mut_ptr(), 1, &mut bt, &mut closed),
                    ApStatus::Ok
                );
                assert!(bt >= 0.0);
                max_closed = max_closed.max(closed);
            }
            // the zero-frequency peak carries density^2
            let mut density = 0.0;
            assert_eq!(ap_scheme_density(scheme, &mut density), ApStatus::Ok);
            assert!((max_closed - density * density).abs() < 1e-9);
            ap_peak_list_free(peaks);
            ap_scheme_free(scheme);
        }
    }

    #[test]
    fn json_scheme_and_buffer_checks() {
        unsafe {
            let json = CString::new(
                r#"{"phys_dim":1,"int_dim":1,
                    "basis":[[1,1.6180339887498949],[1,-0.6180339887498949]],
                    "window":{"type":"interval","a":-1.0,"b":0.6180339887498949,"regular":true}}"#,
            )
            .unwrap();
            let mut scheme: *mut ApScheme = std::ptr::null_mut();
            assert_eq!(ap_scheme_from_json(json.as_ptr(), &mut scheme), ApStatus::Ok);
            let mut points: *mut ApPointSet = std::ptr::null_mut();
            assert_eq!(ap_model_set(scheme, 20.0, &mut points), ApStatus::Ok);
            let mut tiny = [0.0f64; 2];
            assert_eq!(
                ap_point_set_coords(points, tiny.as_mut_ptr(), 2),
                ApStatus::BufferTooSmall
            );
            ap_point_set_free(points);
            ap_scheme_free(scheme);
        }
    }

    #[test]
    fn generated_header_exists_with_the_core_symbols() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include")
            .join("aperiodica.h");
        let text = std::fs::read_to_string(&header)
            .unwrap_or_else(|e| panic!("missing generated header {}: {e}", header.display()));
        for symbol in [
            "typedef struct ApScheme ApScheme;",
            "ap_scheme_builtin",
            "ap_model_set",
            "ap_diffraction_peaks",
            "ap_last_error",
            "ApStatus",
        ] {
            assert!(text.contains(symbol), "header lacks {symbol}");
        }
    }
}
