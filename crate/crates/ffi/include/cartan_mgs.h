#ifndef CARTAN_MGS_H
#define CARTAN_MGS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define CMGS_SUITE_IDENTITIES 1

#define CMGS_SUITE_TYPE1 2

#define CMGS_SUITE_TYPE2 4

#define CMGS_SUITE_TYPE3R 8

#define CMGS_SUITE_TYPE3S 16

#define CMGS_SUITE_ALL 31

typedef enum CmgsStatus {
  CMGS_STATUS_OK = 0,
  CMGS_STATUS_NULL_POINTER = 1,
  CMGS_STATUS_INVALID_PARAMETER = 2,
  CMGS_STATUS_DOMAIN = 3,
  CMGS_STATUS_FORMAT = 4,
  CMGS_STATUS_IO = 5,
  CMGS_STATUS_BUFFER_TOO_SMALL = 6,
  CMGS_STATUS_PANIC = 7,
} CmgsStatus;

/**
 * Opaque handle to a constructed algebra.
 */
typedef struct CmgsAlgebra CmgsAlgebra;

/**
 * Opaque handle to a verification report.
 */
typedef struct CmgsReport CmgsReport;

/**
 * A field element `c0 + c1 s`; `c1` is 0 over a prime field.
 */
typedef struct CmgsScalar {
  uint32_t c0;
  uint32_t c1;
} CmgsScalar;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The library version as a static NUL-terminated string.
 */
const char *cmgs_version(void);

/**
 * Length in bytes of the last error message of this thread, 0 if none.
 */
size_t cmgs_last_error_length(void);

/**
 * Copies the last error message of this thread into `buf`.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes; `out_len` must be
 * null or valid for writes.
 */
enum CmgsStatus cmgs_last_error_message(char *buf, size_t cap, size_t *out_len);

/**
 * Builds `family(m, n)` in characteristic `p`. `family` is one of the
 * characters `W`, `S`, `H`, `K`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum CmgsStatus cmgs_algebra_new(char family,
                                 uint32_t p,
                                 size_t m,
                                 size_t n,
                                 struct CmgsAlgebra **out);

/**
 * # Safety
 * `alg` must be null or a handle from [`cmgs_algebra_new`] not yet freed.
 */
void cmgs_algebra_free(struct CmgsAlgebra *alg);

/**
 * # Safety
 * `alg` must be a live handle and `out` valid for writes.
 */
enum CmgsStatus cmgs_algebra_dim(const struct CmgsAlgebra *alg, size_t *out);

/**
 * Lowest and highest degree with a nonzero component.
 *
 * # Safety
 * `alg` must be a live handle and both outputs valid for writes.
 */
enum CmgsStatus cmgs_algebra_degree_range(const struct CmgsAlgebra *alg,
                                          int32_t *out_min,
                                          int32_t *out_max);

/**
 * Dimension of the degree `degree` component; 0 outside the range.
 *
 * # Safety
 * `alg` must be a live handle and `out` valid for writes.
 */
enum CmgsStatus cmgs_algebra_component_dim(const struct CmgsAlgebra *alg,
                                           int32_t degree,
                                           size_t *out);

/**
 * 1 for GF(p), 2 for GF(p^2).
 *
 * # Safety
 * `alg` must be a live handle and `out` valid for writes.
 */
enum CmgsStatus cmgs_algebra_field_degree(const struct CmgsAlgebra *alg, uint32_t *out);

/**
 * Writes `[e_i, e_j]` as `out_len` pairs of basis index and coefficient.
 * With `cap` too small, `out_len` receives the needed length and nothing
 * else is written.
 *
 * # Safety
 * `alg` must be a live handle; `out_index` and `out_coeff` must point to
 * `cap` writable entries (or be null when `cap` is 0); `out_len` valid for
 * writes.
 */
enum CmgsStatus cmgs_algebra_bracket(const struct CmgsAlgebra *alg,
                                     size_t i,
                                     size_t j,
                                     uint32_t *out_index,
                                     struct CmgsScalar *out_coeff,
                                     size_t cap,
                                     size_t *out_len);

/**
 * Writes the structure-constant cache to `path`.
 *
 * # Safety
 * `alg` must be a live handle and `path` a NUL-terminated UTF-8 string.
 */
enum CmgsStatus cmgs_algebra_write_cache(const struct CmgsAlgebra *alg, const char *path);

/**
 * Runs the suites selected by the `CMGS_SUITE_*` bits with sampled
 * maximality at `samples` vectors per component.
 *
 * # Safety
 * `alg` must be a live handle and `out` valid for writes.
 */
enum CmgsStatus cmgs_verify(const struct CmgsAlgebra *alg,
                            uint32_t suites,
                            size_t samples,
                            uint64_t seed,
                            struct CmgsReport **out);

/**
 * # Safety
 * `report` must be null or a handle from [`cmgs_verify`] not yet freed.
 */
void cmgs_report_free(struct CmgsReport *report);

/**
 * # Safety
 * `report` must be a live handle and `out` valid for writes.
 */
enum CmgsStatus cmgs_report_finding_count(const struct CmgsReport *report, size_t *out);

/**
 * Findings that fail and are not documented discrepancies.
 *
 * # Safety
 * `report` must be a live handle and `out` valid for writes.
 */
enum CmgsStatus cmgs_report_unexpected_failures(const struct CmgsReport *report, size_t *out);

/**
 * Copies the JSON report into `buf`; see [`cmgs_last_error_message`] for
 * the buffer protocol.
 *
 * # Safety
 * `report` must be a live handle; `buf` null or `cap` writable bytes;
 * `out_len` null or valid for writes.
 */
enum CmgsStatus cmgs_report_json(const struct CmgsReport *report,
                                 char *buf,
                                 size_t cap,
                                 size_t *out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CARTAN_MGS_H */
