/* Generated by cbindgen from src/lib.rs; do not edit. */

#ifndef ANYON_H
#define ANYON_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  ANYON_STATUS_OK = 0,
  ANYON_STATUS_NULL_POINTER = 1,
  ANYON_STATUS_INVALID_ARGUMENT = 2,
  ANYON_STATUS_SOLVER_FAILURE = 3,
  ANYON_STATUS_INTEGRATION_FAILURE = 4,
  ANYON_STATUS_NUMERIC_FAILURE = 5,
  ANYON_STATUS_OUT_OF_RANGE = 6,
  ANYON_STATUS_PANIC = 7,
} AnyonStatus;

typedef enum {
  ANYON_METHOD_CIRCULANT = 0,
  ANYON_METHOD_NYSTROM = 1,
} AnyonMethod;

// Normalized one-body density matrix on the outer grid.
typedef struct AnyonRdm AnyonRdm;

// Natural occupations and entropy.
typedef struct AnyonSpectrum AnyonSpectrum;

// Solved Bethe state with its wavefunction evaluator.
typedef struct AnyonState AnyonState;

// Discretization; fill with [`anyon_grid_default`] and adjust.
typedef struct {
  AnyonMethod method;
  uint32_t outer_panels;
  uint32_t outer_order;
  uint32_t profile_panels;
  uint32_t profile_order;
  uint32_t modes;
  uint32_t inner_panels;
  uint32_t inner_order;
} AnyonGrid;

// Physical parameters; `c` is ignored when `hardcore` is set.
typedef struct {
  uint32_t n;
  double length;
  double c;
  double kappa;
  bool hardcore;
} AnyonParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty if none. Valid
// until the next failing call on the same thread.
const char *anyon_last_error(void);

// Default discretization.
//
// # Safety
// `out` must be null or point to writable memory for one `AnyonGrid`.
AnyonStatus anyon_grid_default(AnyonGrid *out);

// Solves the Bethe equations for the ground state.
//
// # Safety
// `params` must point to a valid `AnyonParams` and `out` to writable storage
// for one pointer. On success `*out` owns a state to be released with
// [`anyon_state_free`].
AnyonStatus anyon_solve(const AnyonParams *params, AnyonState **out);

// Copies up to `len` quasi-momenta into `buf` and stores the particle
// number in `count`.
//
// # Safety
// `state` must be a live handle, `buf` must hold `len` doubles (or be null
// when `len` is 0) and `count` must be writable.
AnyonStatus anyon_state_quasi_momenta(const AnyonState *state,
                                      double *buf,
                                      size_t len,
                                      size_t *count);

// Ground-state energy `Σ k²`.
//
// # Safety
// `state` must be a live handle and `out` writable.
AnyonStatus anyon_state_energy(const AnyonState *state, double *out);

// Unnormalized `ψ(x₁, …, x_N)` with coordinates in `[0, L]`.
//
// # Safety
// `state` must be a live handle, `x` must hold `n` doubles and `re`, `im`
// must be writable.
AnyonStatus anyon_state_psi(const AnyonState *state,
                            const double *x,
                            size_t n,
                            double *re,
                            double *im);

// # Safety
// `state` must be null or a handle from [`anyon_solve`] not yet freed.
void anyon_state_free(AnyonState *state);

// Full pipeline for one point. Either output may be null to discard it.
//
// # Safety
// `params` and `grid` must point to valid structs; `rdm` and `spectrum`
// must each be null or writable storage for one pointer. Returned handles
// are released with [`anyon_rdm_free`] and [`anyon_spectrum_free`].
AnyonStatus anyon_run(const AnyonParams *params,
                      const AnyonGrid *grid,
                      AnyonRdm **rdm,
                      AnyonSpectrum **spectrum);

// Number of grid nodes `M`.
//
// # Safety
// `rdm` must be a live handle and `out` writable.
AnyonStatus anyon_rdm_dim(const AnyonRdm *rdm, size_t *out);

// Node `x_i` and weight `w_i` of the outer grid.
//
// # Safety
// `rdm` must be a live handle; `x` and `w` writable.
AnyonStatus anyon_rdm_node(const AnyonRdm *rdm, size_t i, double *x, double *w);

// `ρ₁(x_i, x_j)`, normalized to unit weighted trace.
//
// # Safety
// `rdm` must be a live handle; `re` and `im` writable.
AnyonStatus anyon_rdm_entry(const AnyonRdm *rdm, size_t i, size_t j, double *re, double *im);

// # Safety
// `rdm` must be null or a handle from [`anyon_run`] not yet freed.
void anyon_rdm_free(AnyonRdm *rdm);

// Von Neumann entropy in bits.
//
// # Safety
// `spectrum` must be a live handle and `out` writable.
AnyonStatus anyon_spectrum_entropy(const AnyonSpectrum *spectrum, double *out);

// Copies up to `len` occupations, descending, into `buf` and stores the
// number retained in `count`.
//
// # Safety
// `spectrum` must be a live handle, `buf` must hold `len` doubles (or be
// null when `len` is 0) and `count` must be writable.
AnyonStatus anyon_spectrum_occupations(const AnyonSpectrum *spectrum,
                                       double *buf,
                                       size_t len,
                                       size_t *count);

// # Safety
// `spectrum` must be null or a handle from [`anyon_run`] not yet freed.
void anyon_spectrum_free(AnyonSpectrum *spectrum);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANYON_H */
