#ifndef EPW_H
#define EPW_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum EpwStatus {
  EPW_STATUS_OK = 0,
  EPW_STATUS_NULL_POINTER = 1,
  EPW_STATUS_DOMAIN = 2,
  EPW_STATUS_SHAPE = 3,
  EPW_STATUS_NOT_FUNDAMENTAL = 4,
  EPW_STATUS_POSITIVITY = 5,
  EPW_STATUS_CONVERGENCE = 6,
  EPW_STATUS_PARSE = 7,
  EPW_STATUS_IO = 8,
  EPW_STATUS_CONFIG = 9,
  EPW_STATUS_NUMERIC = 10,
  EPW_STATUS_UNSUPPORTED = 11,
  EPW_STATUS_PANIC = 12,
} EpwStatus;

/**
 * Per-degree basis constants for one wavenumber.
 */
typedef struct EpwBasis EpwBasis;

/**
 * Evanescent parameter nodes.
 */
typedef struct EpwNodeSet EpwNodeSet;

/**
 * Result of a regularized approximation of one spherical wave.
 */
typedef struct EpwSolveReport EpwSolveReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len` bytes) and returns the full message length. Returns 0
 * when no error has been recorded.
 *
 * # Safety
 * `buf` must be null or point to at least `len` writable bytes.
 */
size_t epw_last_error(char *buf, size_t len);

/**
 * Spherical Bessel function `j_ell(r)`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum EpwStatus epw_spherical_bessel_j(uint32_t ell, double r, double *out);

/**
 * Approximate CDF of the evanescence parameter, `Upsilon_N(zeta)`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum EpwStatus epw_upsilon_hat(double zeta, double kappa, uint32_t l_max, double *out);

/**
 * Builds the basis constants for degrees `0..=l_max`.
 *
 * # Safety
 * `out` must be null or valid for writes. The handle must be released with
 * [`epw_basis_free`].
 */
enum EpwStatus epw_basis_new(double kappa, uint32_t l_max, struct EpwBasis **out);

/**
 * Releases a basis handle; null is ignored.
 *
 * # Safety
 * `basis` must be null or a handle from [`epw_basis_new`] not yet freed.
 */
void epw_basis_free(struct EpwBasis *basis);

/**
 * `ln beta_ell`.
 *
 * # Safety
 * `basis` must be a live handle; `out` must be null or valid for writes.
 */
enum EpwStatus epw_basis_log_beta(const struct EpwBasis *basis, uint32_t ell, double *out);

/**
 * `ln alpha_ell` (approximation).
 *
 * # Safety
 * `basis` must be a live handle; `out` must be null or valid for writes.
 */
enum EpwStatus epw_basis_log_alpha(const struct EpwBasis *basis, uint32_t ell, double *out);

/**
 * `|tau_ell|`.
 *
 * # Safety
 * `basis` must be a live handle; `out` must be null or valid for writes.
 */
enum EpwStatus epw_basis_tau_abs(const struct EpwBasis *basis, uint32_t ell, double *out);

/**
 * Generates nodes with strategy `'a'..'e'`. Strategies `'d'` and `'e'` use
 * the built-in direction set of the rounded size.
 *
 * # Safety
 * `out` must be null or valid for writes. The handle must be released with
 * [`epw_nodeset_free`].
 */
enum EpwStatus epw_nodeset_generate(char strategy,
                                    uint32_t l_max,
                                    uint32_t p,
                                    double kappa,
                                    uint64_t seed,
                                    struct EpwNodeSet **out);

/**
 * Releases a node-set handle; null is ignored.
 *
 * # Safety
 * `nodes` must be null or a handle from [`epw_nodeset_generate`] not yet freed.
 */
void epw_nodeset_free(struct EpwNodeSet *nodes);

/**
 * Number of nodes.
 *
 * # Safety
 * `nodes` must be a live handle; `out` must be null or valid for writes.
 */
enum EpwStatus epw_nodeset_len(const struct EpwNodeSet *nodes, size_t *out);

/**
 * Node `index` as `theta1, theta2, theta3, zeta` (in `out[0..4]`) and its
 * normalization `sqrt(mu_N / P)` (in `out[4]`).
 *
 * # Safety
 * `nodes` must be a live handle; `out` must be null or point to 5 writable doubles.
 */
enum EpwStatus epw_nodeset_get(const struct EpwNodeSet *nodes, size_t index, double *out);

/**
 * Approximates `b_ell^m` on the unit sphere with a propagative set
 * (`strategy == 0`) or an evanescent set (`'a'..'e'`, truncation `l_max`) of
 * about `p` waves, `S = ceil(sqrt(oversample P))^2` samples and threshold `epsilon`.
 *
 * # Safety
 * `out` must be null or valid for writes. The handle must be released with
 * [`epw_report_free`].
 */
enum EpwStatus epw_approximate_mode(double kappa,
                                    char strategy,
                                    uint32_t l_max,
                                    uint32_t p,
                                    uint32_t ell,
                                    int32_t m,
                                    double epsilon,
                                    double oversample,
                                    uint64_t seed,
                                    struct EpwSolveReport **out);

/**
 * Releases a report handle; null is ignored.
 *
 * # Safety
 * `report` must be null or a handle from [`epw_approximate_mode`] not yet freed.
 */
void epw_report_free(struct EpwSolveReport *report);

/**
 * Relative residual, coefficient norm, eps-rank, sample count and set size.
 *
 * # Safety
 * `report` must be a live handle; each out pointer must be null (skipped) or valid.
 */
enum EpwStatus epw_report_summary(const struct EpwSolveReport *report,
                                  double *residual,
                                  double *coeff_norm,
                                  size_t *eps_rank,
                                  size_t *s,
                                  size_t *p);

/**
 * Copies up to `len` singular values (descending) into `buf` and writes the
 * total count to `count`.
 *
 * # Safety
 * `report` must be a live handle; `buf` must be null or hold `len` doubles;
 * `count` must be null or valid for writes.
 */
enum EpwStatus epw_report_singular_values(const struct EpwSolveReport *report,
                                          double *buf,
                                          size_t len,
                                          size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPW_H */
