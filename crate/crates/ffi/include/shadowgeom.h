#ifndef SHADOWGEOM_H
#define SHADOWGEOM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_POINTER = 1,
  SG_STATUS_INVALID_ARGUMENT = 2,
  SG_STATUS_DIMENSION_MISMATCH = 3,
  SG_STATUS_DEGENERATE = 4,
  SG_STATUS_FORMAT = 5,
  SG_STATUS_IO = 6,
  /**
   * A suite ran but did not pass.
   */
  SG_STATUS_FAILED = 7,
  SG_STATUS_PANIC = 8,
} SgStatus;

/**
 * Opaque convex body.
 */
typedef struct SgBody SgBody;

typedef struct SgVerdict {
  bool equivalent;
  double residual;
  size_t restarts_used;
} SgVerdict;

typedef struct SgAxis {
  /**
   * False when no axis fits within tolerance.
   */
  bool found;
  bool degenerate;
  double residual;
  double second_best;
} SgAxis;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sg_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated
 * and NUL-terminated when `len > 0`). Returns the full message length
 * without the terminator, 0 when there is none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t sg_last_error(char *buf, size_t len);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void sg_string_free(char *s);

/**
 * # Safety
 * `body` must be null or a handle returned by this library, not yet freed.
 */
void sg_body_free(struct SgBody *body);

/**
 * Ambient dimension, 0 for a null handle.
 *
 * # Safety
 * `body` must be null or a live handle.
 */
size_t sg_body_dim(const struct SgBody *body);

/**
 * Convex hull of `count` points of dimension `dim`, stored row-major.
 * With `symmetric`, the hull of the points and their negatives.
 *
 * # Safety
 * `points` must hold `count * dim` doubles; `out` must be writable.
 */
enum SgStatus sg_body_from_points(const double *points,
                                  size_t count,
                                  size_t dim,
                                  bool symmetric,
                                  struct SgBody **out);

/**
 * Ellipsoid `{x : (x - c)^T Q (x - c) <= 1}` with `shape` = Q row-major.
 *
 * # Safety
 * `center` must hold `dim` doubles, `shape` `dim * dim`; `out` writable.
 */
enum SgStatus sg_body_ellipsoid(const double *center,
                                const double *shape,
                                size_t dim,
                                struct SgBody **out);

/**
 * Body from JSON text: either a serialized body or a generator
 * descriptor, which is built with `seed`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` writable.
 */
enum SgStatus sg_body_from_json(const char *json, uint64_t seed, struct SgBody **out);

/**
 * Serialized body; free the result with [`sg_string_free`].
 *
 * # Safety
 * `body` must be a live handle; `out` writable.
 */
enum SgStatus sg_body_to_json(const struct SgBody *body, char **out);

/**
 * Support function `h_K(u)` for a unit vector `u`.
 *
 * # Safety
 * `u` must hold `dim` doubles; `out` writable.
 */
enum SgStatus sg_support(const struct SgBody *body, const double *u, size_t dim, double *out);

/**
 * Orthogonal projection onto `u⊥`, in the coordinates of an orthonormal
 * basis of `u⊥`. When `basis` is non-null it receives that basis as
 * `dim - 1` rows of length `dim`.
 *
 * # Safety
 * `u` must hold `dim` doubles, `basis` null or `(dim - 1) * dim`.
 */
enum SgStatus sg_project_along(const struct SgBody *body,
                               const double *u,
                               size_t dim,
                               double *basis,
                               struct SgBody **out);

/**
 * Minimum-volume enclosing ellipsoid (centered at the origin for
 * symmetric bodies). Any output pointer may be null.
 *
 * # Safety
 * `center` null or `dim` doubles, `shape` null or `dim * dim`.
 */
enum SgStatus sg_mvee(const struct SgBody *body, double *center, double *shape, double *dual_gap);

/**
 * # Safety
 * `body` must be a live handle; `is_ell` writable, `residual` null or
 * writable.
 */
enum SgStatus sg_is_ellipsoid(const struct SgBody *body,
                              double tol,
                              bool *is_ell,
                              double *residual);

/**
 * Linear (or, with `affine`, affine) equivalence test. `witness`, when
 * non-null, receives the map as `dim * dim` matrix entries followed by
 * `dim` translation entries.
 *
 * # Safety
 * Handles must be live; `out` writable; `witness` null or
 * `dim * (dim + 1)` doubles.
 */
enum SgStatus sg_equivalent(const struct SgBody *first,
                            const struct SgBody *second,
                            double tol,
                            size_t restarts,
                            uint64_t seed,
                            bool affine,
                            struct SgVerdict *out,
                            double *witness);

/**
 * Axis of revolution (of an affine image of a body of revolution with
 * `affine`). When found, `direction` and `point` receive the axis.
 *
 * # Safety
 * `body` must be live; `out` writable; `direction`, `point` null or
 * `dim` doubles.
 */
enum SgStatus sg_revolution_axis(const struct SgBody *body,
                                 double tol,
                                 uint64_t seed,
                                 bool affine,
                                 struct SgAxis *out,
                                 double *direction,
                                 double *point);

/**
 * Runs a property suite and returns its JSON report in `report` (free it
 * with [`sg_string_free`]). `dim` 0 selects the suite default. Returns
 * `Failed` when the suite ran but did not pass; the report is still set.
 *
 * # Safety
 * `lemma_id` must be a NUL-terminated string; `report` writable.
 */
enum SgStatus sg_verify(const char *lemma_id,
                        size_t trials,
                        size_t dim,
                        uint64_t seed,
                        char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHADOWGEOM_H */
