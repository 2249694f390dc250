/* Copyright 2026 The kraus_landscape Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef KRAUS_LANDSCAPE_H
#define KRAUS_LANDSCAPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KlStatus {
  KL_STATUS_OK = 0,
  KL_STATUS_NULL_POINTER = 1,
  KL_STATUS_INVALID_ARGUMENT = 2,
  KL_STATUS_DIMENSION_MISMATCH = 3,
  KL_STATUS_NOT_HERMITIAN = 4,
  KL_STATUS_NOT_UNITARY = 5,
  KL_STATUS_INVALID_DENSITY = 6,
  KL_STATUS_ACCIDENTAL_DEGENERACY = 7,
  KL_STATUS_MARGINAL_MISMATCH = 8,
  KL_STATUS_ENUMERATION_CAP = 9,
  KL_STATUS_NOT_CRITICAL = 10,
  KL_STATUS_OVERFLOW = 11,
  KL_STATUS_PANIC = 99,
} KlStatus;

// Environment kinds accepted by [`kl_spin_bath_new`].
typedef enum KlEnvironmentKind {
  KL_ENVIRONMENT_KIND_SPIN = 0,
  KL_ENVIRONMENT_KIND_OSCILLATOR = 1,
  KL_ENVIRONMENT_KIND_OSCILLATOR_PAIR = 2,
} KlEnvironmentKind;

// Opaque kinematic landscape `J(U) = Tr(U (ρ⊗ϱ) U† (θ⊗I))`.
typedef struct KlLandscape KlLandscape;

// Opaque driven spin-1/2 plus bath model.
typedef struct KlSpinBath KlSpinBath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *kl_last_error_message(void);

// Builds a landscape from diagonal states (`sys_pops`, `env_pops`) and a
// Hermitian `n_sys×n_sys` observable.
//
// # Safety
// Pointers must reference arrays of the stated lengths; `out` must be writable.
enum KlStatus kl_landscape_new(const double *sys_pops,
                               size_t n_sys,
                               const double *env_pops,
                               size_t n_env,
                               const double *theta,
                               struct KlLandscape **out);

// # Safety
// `l` must come from [`kl_landscape_new`] and not be used afterwards.
void kl_landscape_free(struct KlLandscape *l);

// Composite dimension `λN`, or 0 for a null handle.
//
// # Safety
// `l` must be null or a live handle.
size_t kl_landscape_dim(const struct KlLandscape *l);

// # Safety
// `u` must hold `2·dim²` doubles.
enum KlStatus kl_landscape_value(const struct KlLandscape *l,
                                 const double *u,
                                 size_t dim,
                                 double *value);

// Writes the gradient `G` (anti-Hermitian, `2·dim²` doubles) at `u`.
//
// # Safety
// `u` and `gradient` must hold `2·dim²` doubles.
enum KlStatus kl_landscape_gradient(const struct KlLandscape *l,
                                    const double *u,
                                    size_t dim,
                                    double *gradient);

// # Safety
// `l` must be live; outputs must be writable.
enum KlStatus kl_landscape_range(const struct KlLandscape *l, double *j_min, double *j_max);

// Gradient search from the Haar-random unitary drawn with `seed`; ascends
// when `ascend` is nonzero, descends otherwise.
//
// # Safety
// `l` must be live; outputs must be writable.
enum KlStatus kl_landscape_search(const struct KlLandscape *l,
                                  uint64_t seed,
                                  int32_t ascend_flag,
                                  size_t max_iters,
                                  double grad_tol,
                                  double *final_value,
                                  size_t *iterations);

// Applies the channel induced by `u` on `n_sys⊗n_env` with diagonal
// environment state `env_pops` to the density matrix `rho`.
//
// # Safety
// `u` holds `2(n_sys·n_env)²` doubles; `rho` and `result` hold `2·n_sys²`.
enum KlStatus kl_apply_kraus_channel(const double *u,
                                     size_t n_sys,
                                     size_t n_env,
                                     const double *env_pops,
                                     const double *rho,
                                     double *result);

// Number of non-negative integer tables with the given margins.
//
// # Safety
// `rows` and `cols` hold `n_rows` and `n_cols` entries.
enum KlStatus kl_count_tables(const size_t *rows,
                              size_t n_rows,
                              const size_t *cols,
                              size_t n_cols,
                              size_t cap,
                              uint64_t *count);

// Closed-form table count for a pure environment.
//
// # Safety
// `mults` holds `n` entries.
enum KlStatus kl_count_pure_env(const size_t *mults, size_t n, size_t s, uint64_t *count);

// `2N²(N−d_r)(N−e₁)`.
//
// # Safety
// `count` must be writable.
enum KlStatus kl_hessian_count_global(size_t n_sys, size_t d_r, size_t e1, uint64_t *count);

// # Safety
// `rows` and `cols` hold `n_rows` and `n_cols` entries.
enum KlStatus kl_gaussian_count_estimate(const size_t *rows,
                                         size_t n_rows,
                                         const size_t *cols,
                                         size_t n_cols,
                                         double *estimate);

// `size` is the spin dimension λ for [`KlEnvironmentKind::Spin`] and the
// per-mode truncation for oscillator kinds. `kind` takes the values of
// [`KlEnvironmentKind`].
//
// # Safety
// `out` must be writable.
enum KlStatus kl_spin_bath_new(uint32_t kind,
                               size_t size,
                               double omega0,
                               double omega_e,
                               double gamma,
                               struct KlSpinBath **out);

// # Safety
// `m` must come from [`kl_spin_bath_new`] and not be used afterwards.
void kl_spin_bath_free(struct KlSpinBath *m);

// Composite dimension `2λ`, or 0 for a null handle.
//
// # Safety
// `m` must be null or a live handle.
size_t kl_spin_bath_dim(const struct KlSpinBath *m);

// # Safety
// `m` must be live; `rank` writable.
enum KlStatus kl_spin_bath_lie_rank(const struct KlSpinBath *m, double tol, size_t *rank);

// Objective and reduced-state entropy for a piecewise-constant field, with
// the bath in its Gibbs state at `temperature` (`INFINITY` allowed).
//
// # Safety
// `amplitudes` holds `n_slices` doubles; `sys_pops` and `theta_diag` hold 2.
enum KlStatus kl_spin_bath_objective(const struct KlSpinBath *m,
                                     const double *amplitudes,
                                     size_t n_slices,
                                     double t_final,
                                     const double *sys_pops,
                                     const double *theta_diag,
                                     double temperature,
                                     double *value,
                                     double *entropy);

// Exact derivative of the objective with respect to each slice amplitude.
//
// # Safety
// As for [`kl_spin_bath_objective`]; `gradient` holds `n_slices` doubles.
enum KlStatus kl_spin_bath_gradient(const struct KlSpinBath *m,
                                    const double *amplitudes,
                                    size_t n_slices,
                                    double t_final,
                                    const double *sys_pops,
                                    const double *theta_diag,
                                    double temperature,
                                    double *gradient);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KRAUS_LANDSCAPE_H */
