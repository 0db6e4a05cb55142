#ifndef PWLAB_H
#define PWLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum PwlabStatus {
  PWLAB_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  PWLAB_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  PWLAB_STATUS_INVALID_UTF8 = 2,
  /**
   * The input was rejected; see the last error message.
   */
  PWLAB_STATUS_VALIDATION = 3,
  /**
   * An internal invariant failed.
   */
  PWLAB_STATUS_INTERNAL = 4,
  /**
   * An index was out of range.
   */
  PWLAB_STATUS_OUT_OF_RANGE = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  PWLAB_STATUS_PANIC = 6,
} PwlabStatus;

/**
 * Wave kind codes for [`pwlab_spec_new`].
 */
typedef enum PwlabWaveKind {
  PWLAB_WAVE_KIND_A = 0,
  PWLAB_WAVE_KIND_B = 1,
} PwlabWaveKind;

/**
 * Element type codes written by [`pwlab_classify`].
 */
typedef enum PwlabElementKind {
  PWLAB_ELEMENT_KIND_ELLIPTIC = 0,
  PWLAB_ELEMENT_KIND_HYPERBOLIC = 1,
  PWLAB_ELEMENT_KIND_PARABOLIC = 2,
} PwlabElementKind;

/**
 * Opaque Lie algebra with structure constants.
 */
typedef struct PwlabAlgebra PwlabAlgebra;

/**
 * Opaque plane-wave spec.
 */
typedef struct PwlabSpec PwlabSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into the library on the same thread.
 */
const char *pwlab_last_error_message(void);

/**
 * Build a spec from `n x n` row-major `f` (skew) and `b` (symmetric).
 *
 * # Safety
 * `f` and `b` must point to `n * n` doubles; `out` must be writable.
 */
enum PwlabStatus pwlab_spec_new(enum PwlabWaveKind kind,
                                size_t n,
                                const double *f,
                                const double *b,
                                struct PwlabSpec **out);

/**
 * Parse a spec from JSON `{"kind","n","F","B"}`.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum PwlabStatus pwlab_spec_from_json(const char *json, struct PwlabSpec **out);

/**
 * # Safety
 * `spec` must come from this library and not be used afterwards. Null is ignored.
 */
void pwlab_spec_free(struct PwlabSpec *spec);

/**
 * Dimension `n` of the Euclidean part, or 0 for a null handle.
 *
 * # Safety
 * `spec` must be null or a live handle.
 */
size_t pwlab_spec_n(const struct PwlabSpec *spec);

/**
 * Metric at coordinates `(v, x_1..x_n, u)`; writes `(n+2)^2` doubles.
 *
 * # Safety
 * `coords` must hold `n + 2` doubles and `out` room for `(n+2)^2`.
 */
enum PwlabStatus pwlab_spec_metric(const struct PwlabSpec *spec, const double *coords, double *out);

/**
 * Curvature profile at `u` (bivector convention); writes `n^2` doubles.
 *
 * # Safety
 * `out` must have room for `n * n` doubles.
 */
enum PwlabStatus pwlab_spec_curvature_profile(const struct PwlabSpec *spec, double u, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum PwlabStatus pwlab_spec_is_conformally_flat(const struct PwlabSpec *spec,
                                                double tol,
                                                bool *out);

/**
 * Isometry algebra of `spec`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PwlabStatus pwlab_algebra_isom(const struct PwlabSpec *spec, struct PwlabAlgebra **out);

/**
 * Conformal algebra of `spec`; fails for conformally flat specs.
 *
 * # Safety
 * `out` must be writable.
 */
enum PwlabStatus pwlab_algebra_conf(const struct PwlabSpec *spec, struct PwlabAlgebra **out);

/**
 * # Safety
 * `alg` must come from this library and not be used afterwards. Null is ignored.
 */
void pwlab_algebra_free(struct PwlabAlgebra *alg);

/**
 * Dimension of the algebra, or 0 for a null handle.
 *
 * # Safety
 * `alg` must be null or a live handle.
 */
size_t pwlab_algebra_dim(const struct PwlabAlgebra *alg);

/**
 * Largest Jacobi cyclic sum over basis triples, or NaN for a null handle.
 *
 * # Safety
 * `alg` must be null or a live handle.
 */
double pwlab_algebra_jacobi_residual(const struct PwlabAlgebra *alg);

/**
 * Coefficient of basis element `k` in `[x_i, x_j]`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PwlabStatus pwlab_algebra_structure_constant(const struct PwlabAlgebra *alg,
                                                  size_t i,
                                                  size_t j,
                                                  size_t k,
                                                  double *out);

/**
 * Structure constants as JSON `{labels, nonzero, jacobi_residual}`. Release
 * with [`pwlab_string_free`].
 *
 * # Safety
 * `out` must be writable.
 */
enum PwlabStatus pwlab_algebra_to_json(const struct PwlabAlgebra *alg, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void pwlab_string_free(char *s);

/**
 * Classify an `(n+2) x (n+2)` element of so(1, n+1) in the Witt basis.
 *
 * # Safety
 * `matrix` must hold `(n+2)^2` doubles; `kind` and `a` must be writable.
 */
enum PwlabStatus pwlab_classify(const double *matrix,
                                size_t n,
                                double tol,
                                enum PwlabElementKind *kind,
                                double *a);

/**
 * Does the Cahen-Wallach space with symmetric `n x n` matrix `b` admit a
 * left-invariant (`bi_invariant = false`) or bi-invariant Lie group structure?
 *
 * # Safety
 * `b` must hold `n * n` doubles and `out` be writable.
 */
enum PwlabStatus pwlab_cw_decide(const double *b,
                                 size_t n,
                                 bool bi_invariant,
                                 double tol,
                                 bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PWLAB_H */
