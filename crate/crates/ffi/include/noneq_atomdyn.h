/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef NONEQ_ATOMDYN_H
#define NONEQ_ATOMDYN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum NaStatus {
  NA_STATUS_OK = 0,
  NA_STATUS_NULL_POINTER = 1,
  NA_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Permittivity or table problems, including mirror permittivity requests.
   */
  NA_STATUS_MATERIAL = 3,
  /**
   * Singular Fresnel or slab denominators.
   */
  NA_STATUS_OPTICS = 4,
  NA_STATUS_QUADRATURE_NO_CONVERGENCE = 5,
  /**
   * Coupling vanishes or the steady state is not unique.
   */
  NA_STATUS_RATES = 6,
  NA_STATUS_INVALID_STATE = 7,
  NA_STATUS_PANIC = 99,
} NaStatus;

/**
 * Opaque permittivity model.
 */
typedef struct NaModel NaModel;

/**
 * Transition rates for one frequency, as computed by the library.
 */
typedef struct NaRates {
  double omega;
  double gamma0;
  double alpha_w;
  double alpha_m;
  double n_eff;
  double t_eff;
  double gamma_down;
  double gamma_up;
} NaRates;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *na_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes). Returns the full message length in bytes,
 * without the terminator, so callers can size a buffer with a first call.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes of writes.
 */
size_t na_last_error_message(char *buf, size_t len);

/**
 * GaAs Drude-Lorentz model with the built-in parameters.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum NaStatus na_model_gaas(struct NaModel **out);

/**
 * Gold Drude model with the built-in parameters.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum NaStatus na_model_gold(struct NaModel **out);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum NaStatus na_model_vacuum(struct NaModel **out);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum NaStatus na_model_perfect_mirror(struct NaModel **out);

/**
 * ε(ω) = ε∞ (ω² − ω_l² + iγω)/(ω² − ω_r² + iγω).
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum NaStatus na_model_drude_lorentz(double eps_inf,
                                     double omega_l,
                                     double omega_r,
                                     double gamma,
                                     struct NaModel **out);

/**
 * ε(ω) = 1 − ω_pl²/(ω² + iγω).
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum NaStatus na_model_drude(double omega_pl, double gamma, struct NaModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from a `na_model_*` constructor that has not
 * been freed yet.
 */
void na_model_free(struct NaModel *model);

/**
 * Complex permittivity at `omega`.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum NaStatus na_permittivity(const struct NaModel *model,
                              double omega,
                              double *out_re,
                              double *out_im);

/**
 * Frequency where Re ε = −1.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum NaStatus na_surface_resonance(const struct NaModel *model, double *out);

/**
 * The B, C and D factors, each as (x, y, z).
 *
 * # Safety
 * Pointers must be null or valid; each output holds 3 doubles.
 */
enum NaStatus na_env_body_factors(const struct NaModel *model,
                                  double omega,
                                  double z,
                                  double delta,
                                  double *out_b,
                                  double *out_c,
                                  double *out_d);

/**
 * Rates of a transition at `omega` with dipole components `dipole` (C·m).
 *
 * # Safety
 * Pointers must be null or valid; `dipole` holds 3 doubles.
 */
enum NaStatus na_transition_rates(const struct NaModel *model,
                                  double omega,
                                  double z,
                                  double delta,
                                  const double *dipole,
                                  double t_m,
                                  double t_w,
                                  struct NaRates *out);

/**
 * Steady populations (ground, excited) of a two-level emitter.
 *
 * # Safety
 * Pointers must be null or valid; `out` holds 2 doubles.
 */
enum NaStatus na_two_level_steady(const struct NaRates *rates, double *out);

/**
 * Steady populations (ρ11, ρ22, ρ33) of a Λ system from the 3↔1 and 3↔2 rates.
 *
 * # Safety
 * Pointers must be null or valid; `out` holds 3 doubles.
 */
enum NaStatus na_three_level_steady(const struct NaRates *rates31,
                                    const struct NaRates *rates32,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NONEQ_ATOMDYN_H */
