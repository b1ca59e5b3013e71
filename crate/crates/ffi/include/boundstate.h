#ifndef BOUNDSTATE_H
#define BOUNDSTATE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BsShootKind {
  BS_SHOOT_KIND_BOUND_STATE = 0,
  BS_SHOOT_KIND_POSITIVITY_FAILURE_U = 1,
  BS_SHOOT_KIND_POSITIVITY_FAILURE_V = 2,
  BS_SHOOT_KIND_NO_DECAY = 3,
} BsShootKind;

typedef enum BsStatus {
  BS_STATUS_OK = 0,
  BS_STATUS_NULL_POINTER = 1,
  BS_STATUS_INVALID_CONFIG = 2,
  BS_STATUS_INVALID_ARGUMENT = 3,
  BS_STATUS_NUMERICAL = 4,
  BS_STATUS_IO = 5,
  BS_STATUS_PANIC = 6,
} BsStatus;

/**
 * Validated exponent triple (n, alpha, beta).
 */
typedef struct BsConfig BsConfig;

/**
 * Classified shooting result with its sampled profile.
 */
typedef struct BsProfile BsProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or null. Valid until the
 * next call into this library from the same thread.
 */
const char *bs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bs_version(void);

/**
 * # Safety
 * `out` must be a valid pointer to a `BsConfig *` slot.
 */
enum BsStatus bs_config_new(size_t n, double alpha, double beta, struct BsConfig **out);

/**
 * # Safety
 * `config` must be null or a handle from [`bs_config_new`] not yet freed.
 */
void bs_config_free(struct BsConfig *config);

/**
 * Critical exponent (n+2)/(n-2) of the configuration.
 *
 * # Safety
 * `config` must be a live handle.
 */
double bs_config_critical_exponent(const struct BsConfig *config);

/**
 * Bubble with scale `t` centred at the origin, evaluated at radius `r`.
 *
 * # Safety
 * `config` must be a live handle and `out` writable.
 */
enum BsStatus bs_bubble_radial(const struct BsConfig *config, double t, double r, double *out);

/**
 * Finite-difference residual of the bubble on the default radial grid.
 *
 * # Safety
 * `config` must be a live handle and `out` writable.
 */
enum BsStatus bs_bubble_residual(const struct BsConfig *config, double t, double *out);

/**
 * Integrates from (u0, v0) to `r_max` (pass 0 for the default) and classifies.
 *
 * # Safety
 * `config` must be a live handle and `out` a writable `BsProfile *` slot.
 */
enum BsStatus bs_shoot(const struct BsConfig *config,
                       double u0,
                       double v0,
                       double r_max,
                       struct BsProfile **out);

/**
 * # Safety
 * `profile` must be null or a handle from [`bs_shoot`] not yet freed.
 */
void bs_profile_free(struct BsProfile *profile);

/**
 * # Safety
 * `profile` must be a live handle.
 */
enum BsShootKind bs_profile_kind(const struct BsProfile *profile);

/**
 * Radius of the vanishing or decay failure; NaN for a bound state.
 *
 * # Safety
 * `profile` must be a live handle.
 */
double bs_profile_event_radius(const struct BsProfile *profile);

/**
 * First radius where v - u changes sign; NaN if none.
 *
 * # Safety
 * `profile` must be a live handle.
 */
double bs_profile_crossing(const struct BsProfile *profile);

/**
 * # Safety
 * `profile` must be a live handle.
 */
size_t bs_profile_len(const struct BsProfile *profile);

/**
 * Copies the first `len` samples into `r`, `u`, `v`. Any of the output
 * pointers may be null to skip that column.
 *
 * # Safety
 * `profile` must be a live handle; non-null outputs must hold `len` doubles.
 */
enum BsStatus bs_profile_copy(const struct BsProfile *profile,
                              double *r,
                              double *u,
                              double *v,
                              size_t len);

/**
 * Newtonian potential in dimension `n` of the radial source `f` sampled at the
 * increasing radii `r`; writes `len` values into `out`.
 *
 * # Safety
 * `r`, `f` and `out` must each hold `len` doubles.
 */
enum BsStatus bs_newton_potential(size_t n,
                                  const double *r,
                                  const double *f,
                                  size_t len,
                                  double *out);

/**
 * HLS ratio J(f, f) / (|f|_r |f|_s) for f the critical power of the bubble
 * with scale `t`.
 *
 * # Safety
 * `config` must be a live handle and `out` writable.
 */
enum BsStatus bs_hls_bubble_ratio(const struct BsConfig *config,
                                  double lambda,
                                  double r_exp,
                                  double s_exp,
                                  double t,
                                  double *out);

/**
 * Runs acceptance criterion `id` (1 to 12) and stores 1/0 in `passed`.
 *
 * # Safety
 * `passed` must be writable.
 */
enum BsStatus bs_verify_criterion(uint32_t id, uint64_t seed, int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOUNDSTATE_H */
