#ifndef WIGNER_ENTROPY_H
#define WIGNER_ENTROPY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a call.
typedef enum WeStatus {
  WE_STATUS_OK = 0,
  WE_STATUS_NULL_POINTER = 1,
  WE_STATUS_DOMAIN = 2,
  WE_STATUS_UNSUPPORTED = 3,
  WE_STATUS_USAGE = 4,
  WE_STATUS_GAUSSIANITY_NOT_PRESERVED = 5,
  WE_STATUS_ACCURACY = 6,
  WE_STATUS_CONFIG = 7,
  WE_STATUS_STABILITY = 8,
  WE_STATUS_SELF_CHECK = 9,
  WE_STATUS_PANIC = 10,
} WeStatus;

// Evaluation route for the entropy production rate.
typedef enum WeMethod {
  WE_METHOD_CLOSED_FORM = 0,
  WE_METHOD_QUADRATURE = 1,
  WE_METHOD_QUADRATIC_FORM = 2,
} WeMethod;

// How to read [`WeRateReport::phi_vn`].
typedef enum WeVnKind {
  // Not defined for this reservoir; `phi_vn` is NaN.
  WE_VN_KIND_UNDEFINED = 0,
  WE_VN_KIND_FINITE = 1,
  WE_VN_KIND_PLUS_INFINITY = 2,
  WE_VN_KIND_MINUS_INFINITY = 3,
} WeVnKind;

// Bath-energy ratio used in the stochastic entropy.
typedef enum WeKernel {
  WE_KERNEL_TRUNCATED = 0,
  WE_KERNEL_FULL = 1,
} WeKernel;

typedef struct WeBath WeBath;

typedef struct WeHamiltonian WeHamiltonian;

typedef struct WeState WeState;

typedef struct WeComplex {
  double re;
  double im;
} WeComplex;

// First and second moments: `mu = ⟨a⟩`, `s = ⟨a†a⟩ − |μ|² + ½`, `m = ⟨aa⟩ − μ²`.
typedef struct WeMoments {
  struct WeComplex mu;
  double s;
  struct WeComplex m;
} WeMoments;

typedef struct WeRateReport {
  double pi;
  double phi;
  double dsdt;
  double phi_e;
  double entropy;
  double phi_vn;
  enum WeVnKind phi_vn_kind;
} WeRateReport;

typedef struct WeSteadyProduction {
  double instantaneous;
  double time_averaged;
} WeSteadyProduction;

// Parameters of a thermal Langevin ensemble.
typedef struct WeLangevinSpec {
  double omega;
  double gamma;
  double nbar;
  double dt;
  size_t n_steps;
  size_t n_paths;
  uint64_t seed;
} WeLangevinSpec;

typedef struct WeFtResult {
  // Jackknife estimate of `⟨e^{−Σ}⟩` and its standard error.
  double exp_minus_sigma;
  double exp_minus_sigma_stderr;
  double sigma_mean;
  double sigma_stderr;
} WeFtResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Description of the most recent failure on this thread; empty if none.
// The pointer stays valid until the next failing call on the same thread.
const char *we_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *we_version(void);

// # Safety
// `out` must be valid for writes.
enum WeStatus we_state_new(struct WeComplex mu, double s, struct WeComplex m, struct WeState **out);

// # Safety
// `out` must be valid for writes.
enum WeStatus we_state_coherent(struct WeComplex mu, struct WeState **out);

// # Safety
// `out` must be valid for writes.
enum WeStatus we_state_thermal(double nbar, struct WeState **out);

// # Safety
// `state` must be null or a handle from this library, not yet freed.
void we_state_free(struct WeState *state);

// # Safety
// `state` must be a live handle and `out` valid for writes.
enum WeStatus we_state_moments(const struct WeState *state, struct WeMoments *out);

// Wigner entropy `½ ln det Θ + 1 + ln π`.
//
// # Safety
// `state` must be a live handle and `out` valid for writes.
enum WeStatus we_state_wigner_entropy(const struct WeState *state, double *out);

// # Safety
// `state` must be a live handle and `out` valid for writes.
enum WeStatus we_state_wigner(const struct WeState *state, struct WeComplex alpha, double *out);

// # Safety
// `out` must be valid for writes.
enum WeStatus we_bath_thermal(double gamma, double nbar, struct WeBath **out);

// # Safety
// `out` must be valid for writes.
enum WeStatus we_bath_squeezed(double gamma,
                               double nbar,
                               double r,
                               double theta,
                               double omega_s,
                               struct WeBath **out);

// # Safety
// `out` must be valid for writes.
enum WeStatus we_bath_dephasing(double lambda, struct WeBath **out);

// # Safety
// `bath` must be null or a handle from this library, not yet freed.
void we_bath_free(struct WeBath *bath);

// Cavity at `omega_c`; with `pumped` non-zero, driven by `e·e^{−iω_p t}`.
//
// # Safety
// `out` must be valid for writes.
enum WeStatus we_hamiltonian_new(double omega_c,
                                 bool pumped,
                                 struct WeComplex e,
                                 double omega_p,
                                 struct WeHamiltonian **out);

// # Safety
// `ham` must be null or a handle from this library, not yet freed.
void we_hamiltonian_free(struct WeHamiltonian *ham);

// Π, Φ, dS/dt, Φ_E, S and Φ_vN at time `t`, with the entropy balance checked.
//
// # Safety
// Handles must be live and `out` valid for writes.
enum WeStatus we_rate_report(const struct WeState *state,
                             const struct WeBath *bath,
                             const struct WeHamiltonian *ham,
                             double t,
                             enum WeMethod method,
                             struct WeRateReport *out);

// Asymptotic state of a linear reservoir.
//
// # Safety
// Handles must be live and `out` valid for writes.
enum WeStatus we_steady_state(const struct WeBath *bath,
                              const struct WeHamiltonian *ham,
                              double t,
                              struct WeState **out);

// Steady-state entropy production of a pumped cavity in a squeezed reservoir.
//
// # Safety
// Handles must be live and `out` valid for writes.
enum WeStatus we_steady_production(const struct WeBath *bath,
                                   const struct WeHamiltonian *ham,
                                   double t,
                                   struct WeSteadyProduction *out);

// `|J_b|²/W²` of an unpumped cavity at its steady state in a squeezed reservoir.
//
// # Safety
// Handles must be live and `out` valid for writes.
enum WeStatus we_jb_field_squared(const struct WeBath *bath,
                                  const struct WeHamiltonian *ham,
                                  double t,
                                  struct WeComplex alpha,
                                  double *out);

// Integrate the moment equations from `t0` to `t1` in `n_steps` RK4 steps.
//
// # Safety
// Handles must be live and `out` valid for writes.
enum WeStatus we_evolve(const struct WeState *state,
                        const struct WeBath *bath,
                        const struct WeHamiltonian *ham,
                        double t0,
                        double t1,
                        size_t n_steps,
                        struct WeState **out);

// Langevin ensemble from `initial` and the fluctuation-theorem estimate of
// its stochastic entropy production.
//
// # Safety
// `spec` and `initial` must be valid and `out` valid for writes.
enum WeStatus we_fluctuation_theorem(const struct WeLangevinSpec *spec,
                                     const struct WeState *initial,
                                     enum WeKernel kernel,
                                     struct WeFtResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WIGNER_ENTROPY_H */
