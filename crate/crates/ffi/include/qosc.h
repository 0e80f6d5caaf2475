#ifndef QOSC_H
#define QOSC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum QoscStatus {
  QOSC_STATUS_OK = 0,
  QOSC_STATUS_NULL_POINTER = 1,
  QOSC_STATUS_INVALID_PARAMETER = 2,
  QOSC_STATUS_INVALID_STATE = 3,
  QOSC_STATUS_UNSTABLE = 4,
  QOSC_STATUS_NUMERICAL = 5,
  QOSC_STATUS_PANIC = 6,
} QoscStatus;

/**
 * Damping regime, as returned by [`qosc_model_frequency`].
 */
typedef enum QoscRegime {
  QOSC_REGIME_UNDERDAMPED = 0,
  QOSC_REGIME_CRITICAL = 1,
  QOSC_REGIME_OVERDAMPED = 2,
  QOSC_REGIME_UNSTABLE = 3,
} QoscRegime;

/**
 * Opaque driving force.
 */
typedef struct QoscForce QoscForce;

/**
 * Opaque parameter set.
 */
typedef struct QoscModel QoscModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *qosc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qosc_version(void);

/**
 * Creates a parameter set `(omega0, gamma, theta1, theta2, eta0, eta1, eta2)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QoscStatus qosc_model_new(double omega0,
                               double gamma,
                               double theta1,
                               double theta2,
                               double eta0,
                               double eta1,
                               double eta2,
                               struct QoscModel **out);

/**
 * Creates the standard damping set with bath occupation `nbar`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QoscStatus qosc_model_gksl(double omega0, double gamma, double nbar, struct QoscModel **out);

/**
 * Releases a parameter set; null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from this library that has not been freed.
 */
void qosc_model_free(struct QoscModel *model);

/**
 * Renormalized frequency `omega = re + i im` and the damping regime.
 *
 * # Safety
 * `model` must be a live handle; the output pointers must be valid.
 */
enum QoscStatus qosc_model_frequency(const struct QoscModel *model,
                                     double *re,
                                     double *im,
                                     enum QoscRegime *regime);

/**
 * Constant force `lambda = lr + i li`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QoscStatus qosc_force_constant(double lr, double li, struct QoscForce **out);

/**
 * Impulses `A delta(t - a) + i B delta(t - b)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QoscStatus qosc_force_impulse(double amp_a,
                                   double a_time,
                                   double amp_b,
                                   double b_time,
                                   struct QoscForce **out);

/**
 * Steps `A H(t - a) + i B H(t - b)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QoscStatus qosc_force_heaviside(double amp_a,
                                     double a_time,
                                     double amp_b,
                                     double b_time,
                                     struct QoscForce **out);

/**
 * Rotating force `R e^{i Omega t}`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QoscStatus qosc_force_harmonic(double amp, double omega, struct QoscForce **out);

/**
 * Piecewise-linear force through `n` samples, zero outside the sampled interval.
 *
 * # Safety
 * `times`, `lr` and `li` must each point to `n` readable values; `out` must be valid.
 */
enum QoscStatus qosc_force_sampled(const double *times,
                                   const double *lr,
                                   const double *li,
                                   size_t n,
                                   struct QoscForce **out);

/**
 * Releases a force; null is ignored.
 *
 * # Safety
 * `force` must be null or a handle from this library that has not been freed.
 */
void qosc_force_free(struct QoscForce *force);

/**
 * First moments `(q, p)` at the `n` times, starting from `(q0, p0)`. `force` may be null
 * for free evolution.
 *
 * # Safety
 * `model` must be a live handle, `force` null or live; `times` must hold `n` values and
 * `q_out`, `p_out` room for `n` values each.
 */
enum QoscStatus qosc_first_moments(const struct QoscModel *model,
                                   const struct QoscForce *force,
                                   double q0,
                                   double p0,
                                   const double *times,
                                   size_t n,
                                   double *q_out,
                                   double *p_out);

/**
 * Second moments `(sigma_xx, sigma_pp, sigma_xp)` at time `t` from a Gaussian state with
 * kernel parameters `(mu, nu, kappa)`.
 *
 * # Safety
 * `model` must be a live handle and `out` must have room for three values.
 */
enum QoscStatus qosc_second_moments(const struct QoscModel *model,
                                    double mu,
                                    double nu,
                                    double kappa,
                                    double t,
                                    double *out);

/**
 * Stationary second moments `(sigma_xx, sigma_pp, sigma_xp)`.
 *
 * # Safety
 * `model` must be a live handle and `out` must have room for three values.
 */
enum QoscStatus qosc_stationary_moments(const struct QoscModel *model, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QOSC_H */
