#ifndef GERBER_H
#define GERBER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define GERBER_VARIANT_ORIGINAL 0

#define GERBER_VARIANT_GS1 1

#define GERBER_VARIANT_GS2 2

#define GERBER_VERDICT_PSD 0

#define GERBER_VERDICT_BORDERLINE 1

#define GERBER_VERDICT_NOT_PSD 2

typedef enum GerberStatus {
  GERBER_STATUS_OK = 0,
  GERBER_STATUS_NULL_POINTER = 1,
  GERBER_STATUS_INVALID_ARGUMENT = 2,
  // Malformed or degenerate input data.
  GERBER_STATUS_DATA = 3,
  // A statistic is undefined for this input (e.g. an asset never pierces).
  GERBER_STATUS_PRECONDITION = 4,
  GERBER_STATUS_IO = 5,
  GERBER_STATUS_BUFFER_TOO_SMALL = 6,
  GERBER_STATUS_PANIC = 7,
} GerberStatus;

// A computed co-movement matrix together with the per-asset sigmas it was
// thresholded with.
typedef struct GerberMatrix GerberMatrix;

// A validated return panel.
typedef struct GerberReturns GerberReturns;

typedef struct GerberPsdReport {
  double lambda_min;
  double lambda_max;
  // 1 if a Cholesky factorisation succeeded (possibly shifted).
  int cholesky_ok;
  // Diagonal shift used by the successful factorisation, 0 if none.
  double cholesky_shift;
  double tolerance;
  // One of the `GERBER_VERDICT_*` constants.
  uint32_t verdict;
} GerberPsdReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Static description of a status code. Never null.
const char *gerber_status_string(int status);

// Message for the last failed call on this thread, or null if the last call
// succeeded. Valid until the next call into this library on the same thread.
const char *gerber_last_error(void);

// Builds a panel from `periods * assets` row-major values (one row per
// period). Asset labels are `A1..AK`.
//
// # Safety
// `data` must point to `periods * assets` readable doubles and `out` must be
// writable.
enum GerberStatus gerber_returns_from_rows(const double *data,
                                           size_t periods,
                                           size_t assets,
                                           struct GerberReturns **out);

// Loads a comma-separated panel with a header row of asset labels. When
// `period_column` is non-zero the first column holds period labels.
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string and `out` must be writable.
enum GerberStatus gerber_returns_load_csv(const char *path,
                                          int period_column,
                                          struct GerberReturns **out);

// Number of periods, or 0 for a null handle.
//
// # Safety
// `returns` must be null or a live handle.
size_t gerber_returns_periods(const struct GerberReturns *returns);

// Number of assets, or 0 for a null handle.
//
// # Safety
// `returns` must be null or a live handle.
size_t gerber_returns_assets(const struct GerberReturns *returns);

// # Safety
// `returns` must be null or a handle not yet freed.
void gerber_returns_free(struct GerberReturns *returns);

// Computes one co-movement statistic (`GERBER_VARIANT_*`) at threshold
// fraction `c`.
//
// # Safety
// `returns` must be a live handle and `out` must be writable.
enum GerberStatus gerber_compute(const struct GerberReturns *returns,
                                 uint32_t variant,
                                 double c,
                                 struct GerberMatrix **out);

// Matrix dimension K, or 0 for a null handle.
//
// # Safety
// `matrix` must be null or a live handle.
size_t gerber_matrix_assets(const struct GerberMatrix *matrix);

// Copies the K*K matrix entries, row-major, into `out`.
//
// # Safety
// `matrix` must be a live handle; `out` must hold `len` writable doubles.
enum GerberStatus gerber_matrix_values(const struct GerberMatrix *matrix, double *out, size_t len);

// Copies the implied covariance `diag(sigma) G diag(sigma)`, row-major.
//
// # Safety
// `matrix` must be a live handle; `out` must hold `len` writable doubles.
enum GerberStatus gerber_matrix_covariance(const struct GerberMatrix *matrix,
                                           double *out,
                                           size_t len);

// Copies the per-asset sigmas (K values) into `out`.
//
// # Safety
// `matrix` must be a live handle; `out` must hold `len` writable doubles.
enum GerberStatus gerber_matrix_sigmas(const struct GerberMatrix *matrix, double *out, size_t len);

// Writes the NUL-terminated label of asset `index` into `buf`. `needed`, if
// non-null, receives the required size including the terminator, also when
// the buffer is too small.
//
// # Safety
// `matrix` must be a live handle; `buf` must hold `len` writable bytes.
enum GerberStatus gerber_matrix_label(const struct GerberMatrix *matrix,
                                      size_t index,
                                      char *buf,
                                      size_t len,
                                      size_t *needed);

// Eigenvalue and Cholesky check of the matrix. `tolerance <= 0` selects the
// library default.
//
// # Safety
// `matrix` must be a live handle and `out` must be writable.
enum GerberStatus gerber_matrix_check_psd(const struct GerberMatrix *matrix,
                                          double tolerance,
                                          struct GerberPsdReport *out);

// # Safety
// `matrix` must be null or a handle not yet freed.
void gerber_matrix_free(struct GerberMatrix *matrix);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GERBER_H */
