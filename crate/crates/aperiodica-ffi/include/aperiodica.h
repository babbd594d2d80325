/* C interface to the aperiodica library (generated by cbindgen). */

#ifndef APERIODICA_H
#define APERIODICA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every fallible call.
typedef enum ApStatus {
  ApStatus_Ok = 0,
  ApStatus_NullPointer = 1,
  ApStatus_InvalidArgument = 2,
  ApStatus_ComputationError = 3,
  ApStatus_BufferTooSmall = 4,
  ApStatus_Panic = 5,
} ApStatus;

// Opaque peak-list handle.
typedef struct ApPeakList ApPeakList;

// Opaque point-set handle.
typedef struct ApPointSet ApPointSet;

// Opaque cut-and-project scheme handle.
typedef struct ApScheme ApScheme;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL
// terminated, truncated to `len`); returns the full message length in
// bytes, excluding the terminator.
//
// # Safety
// `buf` must point to at least `len` writable bytes, or be null (the
// call then only reports the length).
size_t ap_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *ap_version(void);

// Builds a built-in scheme (`"fibonacci"` or `"octagonal"`).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be a valid pointer.
// On success `*out` owns the scheme; release with [`ap_scheme_free`].
enum ApStatus ap_scheme_builtin(const char *name, struct ApScheme **out);

// Builds a scheme from the JSON configuration format.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be a valid pointer.
enum ApStatus ap_scheme_from_json(const char *json, struct ApScheme **out);

// # Safety
// `scheme` must come from a scheme constructor and not have been freed.
void ap_scheme_free(struct ApScheme *scheme);

// # Safety
// `scheme` and `out` must be valid pointers.
enum ApStatus ap_scheme_covolume(const struct ApScheme *scheme, double *out);

// Point density of the model set (window volume over covolume).
//
// # Safety
// `scheme` and `out` must be valid pointers.
enum ApStatus ap_scheme_density(const struct ApScheme *scheme, double *out);

// Generates the model set inside the centered ball of `region_radius`.
//
// # Safety
// `scheme` must be a live scheme handle; `out` must be a valid pointer.
// On success `*out` owns the point set; release with
// [`ap_point_set_free`].
enum ApStatus ap_model_set(const struct ApScheme *scheme,
                           double region_radius,
                           struct ApPointSet **out);

// # Safety
// `points` must come from [`ap_model_set`] and not have been freed.
void ap_point_set_free(struct ApPointSet *points);

// Number of points; 0 for a null handle.
//
// # Safety
// `points` must be a live handle or null.
size_t ap_point_set_len(const struct ApPointSet *points);

// Ambient dimension; 0 for a null handle.
//
// # Safety
// `points` must be a live handle or null.
size_t ap_point_set_dim(const struct ApPointSet *points);

// Copies coordinates row-major (`len * dim` doubles) into `buf`.
//
// # Safety
// `points` must be a live handle; `buf` must point to at least `buf_len`
// writable doubles.
enum ApStatus ap_point_set_coords(const struct ApPointSet *points, double *buf, size_t buf_len);

// Packing and covering radii of the sample; `exact` reports whether the
// covering value is exact (1) or grid-estimated (0).
//
// # Safety
// All pointers must be valid; `points` must be a live handle.
enum ApStatus ap_delone_params(const struct ApPointSet *points,
                               double *packing,
                               double *covering,
                               int32_t *exact);

// Anchored autocorrelation coefficient `c_z` at averaging radius `n`.
//
// # Safety
// `z` must point to `z_len` doubles; `points` must be a live handle;
// `out` must be valid.
enum ApStatus ap_autocorr_coefficient(const struct ApPointSet *points,
                                      const double *z,
                                      size_t z_len,
                                      double n,
                                      double *out);

// Measured intensity `|c_S(xi)|^2` on the sample.
//
// # Safety
// `xi` must point to `xi_len` doubles; `points` must be a live handle;
// `out` must be valid.
enum ApStatus ap_bt_intensity(const struct ApPointSet *points,
                              const double *xi,
                              size_t xi_len,
                              double s,
                              double *out);

// Generates the model set at `region_radius`, enumerates the Fourier
// module up to the cutoffs, and measures every candidate.
//
// # Safety
// `scheme` must be a live handle; `out` must be valid. On success `*out`
// owns the peak list; release with [`ap_peak_list_free`].
enum ApStatus ap_diffraction_peaks(const struct ApScheme *scheme,
                                   double region_radius,
                                   double k_max,
                                   double k_int_max,
                                   struct ApPeakList **out);

// # Safety
// `peaks` must come from [`ap_diffraction_peaks`] and not have been
// freed.
void ap_peak_list_free(struct ApPeakList *peaks);

// Number of peaks; 0 for a null handle.
//
// # Safety
// `peaks` must be a live handle or null.
size_t ap_peak_list_len(const struct ApPeakList *peaks);

// Reads one peak: frequency components into `xi` (length `xi_len` must
// match the physical dimension), the measured intensity, and the
// closed-form intensity (NaN when unavailable).
//
// # Safety
// `peaks` must be a live handle; `xi` must point to `xi_len` writable
// doubles; `intensity_bt` and `intensity_closed` must be valid.
enum ApStatus ap_peak_list_entry(const struct ApPeakList *peaks,
                                 size_t index,
                                 double *xi,
                                 size_t xi_len,
                                 double *intensity_bt,
                                 double *intensity_closed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APERIODICA_H */
