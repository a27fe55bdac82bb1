#ifndef COHRES_H
#define COHRES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The first four match the exit codes of the command-line tool.
 */
typedef enum CohresStatus {
  COHRES_STATUS_OK = 0,
  COHRES_STATUS_CHECK_FAILED = 1,
  COHRES_STATUS_INVALID_ARGUMENT = 2,
  COHRES_STATUS_NUMERIC_FAILURE = 3,
  COHRES_STATUS_NULL_POINTER = 4,
  COHRES_STATUS_BUFFER_TOO_SMALL = 5,
  COHRES_STATUS_PANIC = 6,
} CohresStatus;

/**
 * A multisoliton transformation sampled on its default grid.
 */
typedef struct CohresSoliton CohresSoliton;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `cap`) and returns the full message length in bytes, or 0
 * when there is none.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
uintptr_t cohres_last_error(char *buf, uintptr_t cap);

/**
 * Leading `(n_max+1) x (n_max+1)` block of `S = f(p)`, row-major.
 *
 * # Safety
 * `alphas` must hold `n_alphas` doubles and `out` `out_len` doubles.
 */
enum CohresStatus cohres_s_matrix(const double *alphas,
                                  uintptr_t n_alphas,
                                  uintptr_t n_max,
                                  double *out,
                                  uintptr_t out_len);

/**
 * Leading `block x block` part of `S^-1`, row-major, certified by doubling
 * the truncation until successive blocks differ by at most `tolerance`.
 *
 * # Safety
 * `alphas` must hold `n_alphas` doubles and `out` `out_len` doubles.
 */
enum CohresStatus cohres_s_inverse_block(const double *alphas,
                                         uintptr_t n_alphas,
                                         uintptr_t block,
                                         double tolerance,
                                         double *out,
                                         uintptr_t out_len);

/**
 * Density of the measure for the symmetry-transformed states at `xs`.
 *
 * # Safety
 * `alphas`, `xs` and `out` must hold `n_alphas`, `n` and `n` doubles.
 */
enum CohresStatus cohres_omega_xi(const double *alphas,
                                  uintptr_t n_alphas,
                                  const double *xs,
                                  uintptr_t n,
                                  double *out);

/**
 * Fourier-side density of the functional at `ts`; `damped` selects the
 * form without the `exp(t^2/8)` factor.
 *
 * # Safety
 * `alphas`, `ts` and `out` must hold `n_alphas`, `n` and `n` doubles.
 */
enum CohresStatus cohres_omega_rho(const double *alphas,
                                   uintptr_t n_alphas,
                                   const double *ts,
                                   uintptr_t n,
                                   bool damped,
                                   double *out);

/**
 * The functional applied to `exp(-|z|^2) conj(z)^n z^k`.
 *
 * # Safety
 * `alphas` must hold `n_alphas` doubles; `re` and `im` must be writable.
 */
enum CohresStatus cohres_functional_rho(const double *alphas,
                                        uintptr_t n_alphas,
                                        uintptr_t n,
                                        uintptr_t k,
                                        double *re,
                                        double *im);

/**
 * Builds a soliton handle; `shifts` may be null.
 *
 * # Safety
 * `alphas` must hold `n_alphas` doubles, `shifts` null or `n_alphas`
 * doubles, and `out` must be writable.
 */
enum CohresStatus cohres_soliton_new(const double *alphas,
                                     const double *shifts,
                                     uintptr_t n_alphas,
                                     struct CohresSoliton **out);

/**
 * Releases a handle from [`cohres_soliton_new`]; null is ignored.
 *
 * # Safety
 * `handle` must be null or a live handle that is not used afterwards.
 */
void cohres_soliton_free(struct CohresSoliton *handle);

/**
 * Number of solitons, i.e. the order of the intertwiner.
 *
 * # Safety
 * `handle` must be a live handle.
 */
uintptr_t cohres_soliton_order(const struct CohresSoliton *handle);

/**
 * Potential at `xs`.
 *
 * # Safety
 * `handle` must be live; `xs` and `out` must hold `n` doubles.
 */
enum CohresStatus cohres_soliton_potential(const struct CohresSoliton *handle,
                                           const double *xs,
                                           uintptr_t n,
                                           double *out);

/**
 * Rayleigh quotients of the normalized bound states, one per soliton, in
 * the order of the sorted parameters.
 *
 * # Safety
 * `handle` must be live and `out` must hold `out_len` doubles.
 */
enum CohresStatus cohres_soliton_bound_energies(const struct CohresSoliton *handle,
                                                double *out,
                                                uintptr_t out_len);

/**
 * Runs a verification suite (`xi`, `rho`, `darboux`, `coherent` or `all`)
 * and returns the JSON report through `report`. The status is
 * `COHRES_STATUS_CHECK_FAILED` when the report is produced but a check fails.
 *
 * # Safety
 * `suite` must be a NUL-terminated string, `alphas` must hold `n_alphas`
 * doubles and `report` must be writable.
 */
enum CohresStatus cohres_verify_json(const char *suite,
                                     const double *alphas,
                                     uintptr_t n_alphas,
                                     uintptr_t n_max,
                                     char **report);

/**
 * Releases a string returned by the library; null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library that is not used afterwards.
 */
void cohres_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COHRES_H */
