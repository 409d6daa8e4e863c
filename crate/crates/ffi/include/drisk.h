#ifndef DRISK_H
#define DRISK_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum DriskStatus {
  DRISK_STATUS_OK = 0,
  DRISK_STATUS_PARSE = 1,
  DRISK_STATUS_DOMAIN = 2,
  DRISK_STATUS_DIVERGENCE = 3,
  DRISK_STATUS_UNSUPPORTED = 4,
  DRISK_STATUS_NULL_POINTER = 5,
  DRISK_STATUS_IO = 6,
  DRISK_STATUS_PANIC = 7,
} DriskStatus;

/**
 * Shape reported by [`drisk_distortion_classify`].
 */
typedef enum DriskShape {
  DRISK_SHAPE_LINEAR = 0,
  DRISK_SHAPE_CONCAVE = 1,
  DRISK_SHAPE_CONVEX = 2,
  DRISK_SHAPE_NEITHER = 3,
  DRISK_SHAPE_PIECEWISE = 4,
} DriskShape;

/**
 * Opaque distortion function.
 */
typedef struct DriskDistortion DriskDistortion;

/**
 * Opaque loss distribution.
 */
typedef struct DriskDistribution DriskDistribution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *drisk_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *drisk_version(void);

/**
 * Parse a distortion spec such as `"tvar:0.95"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DriskStatus drisk_distortion_parse(const char *spec, struct DriskDistortion **out);

/**
 * # Safety
 * `g` must come from [`drisk_distortion_parse`] and not be used afterwards.
 */
void drisk_distortion_free(struct DriskDistortion *g);

/**
 * g(u), with u clamped to [0, 1].
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum DriskStatus drisk_distortion_eval(const struct DriskDistortion *g, double u, double *out);

/**
 * Grid classification of g on `grid` cells (at least 16).
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum DriskStatus drisk_distortion_classify(const struct DriskDistortion *g,
                                           size_t grid,
                                           enum DriskShape *out);

/**
 * Parse a distribution descriptor such as `"pareto:2,1"` or
 * `"discrete:0:0.6,100:0.4"`.
 *
 * # Safety
 * `desc` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DriskStatus drisk_distribution_parse(const char *desc, struct DriskDistribution **out);

/**
 * # Safety
 * `d` must come from [`drisk_distribution_parse`] and not be used afterwards.
 */
void drisk_distribution_free(struct DriskDistribution *d);

/**
 * P(X > x).
 *
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum DriskStatus drisk_distribution_survival(const struct DriskDistribution *d,
                                             double x,
                                             double *out);

/**
 * ρ_g[X]. `abs_error` may be NULL.
 *
 * # Safety
 * Handles must be live; `value` must be valid, `abs_error` valid or NULL.
 */
enum DriskStatus drisk_choquet(const struct DriskDistortion *g,
                               const struct DriskDistribution *d,
                               double *value,
                               double *abs_error);

/**
 * Lower p-quantile.
 *
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum DriskStatus drisk_var(const struct DriskDistribution *d, double p, double *out);

/**
 * Tail value at risk at level p.
 *
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum DriskStatus drisk_tvar(const struct DriskDistribution *d, double p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DRISK_H */
