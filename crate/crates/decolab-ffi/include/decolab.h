/* C ABI for the decolab entropy-production library. */

#ifndef DECOLAB_H
#define DECOLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a decolab call; zero means success.
typedef enum DecolabStatus {
  DECOLAB_STATUS_OK = 0,
  DECOLAB_STATUS_NULL_POINTER = 1,
  DECOLAB_STATUS_INVALID_ARGUMENT = 2,
  DECOLAB_STATUS_CONDITION_VIOLATED = 3,
  DECOLAB_STATUS_UNDER_RESOLVED = 4,
  DECOLAB_STATUS_INTEGRATION_FAILURE = 5,
  DECOLAB_STATUS_IO_FAILURE = 6,
} DecolabStatus;

// Opaque set of Lindblad channels linear in position and momentum.
typedef struct DecolabChannelSet DecolabChannelSet;

// Opaque spatial correlation kernel (Gaussian or tabulated spectrum).
typedef struct DecolabKernel DecolabKernel;

// Diffusion coefficients of the quadratic-channel family.
typedef struct DecolabDiffusion {
  double d_qq;
  double d_pp;
  double d_pq;
  double lambda;
  double mu;
} DecolabDiffusion;

// Oscillator parameters: mass, angular frequency, quantum of action.
typedef struct DecolabOscillator {
  double mass;
  double omega;
  double hbar;
} DecolabOscillator;

// Squeezed coherent state coordinates: displacement `alpha`, squeeze
// magnitude `s` (>= 0), squeeze phase `theta`.
typedef struct DecolabState {
  double alpha_re;
  double alpha_im;
  double s;
  double theta;
} DecolabState;

// Sieve search controls; pass zeros to take the defaults
// (s_max 2, 48 x 64 grid, refinement tolerance 1e-9).
typedef struct DecolabSieveGrid {
  double s_max;
  size_t n_s;
  size_t n_theta;
  double refinement_tol;
  size_t refinement_max_iter;
} DecolabSieveGrid;

// Sieve outcome. When `flat_objective` is nonzero the objective had no
// gradable minimum and the starred fields are meaningless.
typedef struct DecolabSieveResult {
  double s_star;
  double theta_star;
  double delta_sigma_star;
  int32_t flat_objective;
  // Nonzero when `stationarity_residual` is populated.
  int32_t has_stationarity_residual;
  double stationarity_residual;
} DecolabSieveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the most recent error message on this thread into `buffer`
// (nul-terminated, truncated to `capacity`). Returns the full message
// length in bytes, or 0 when no error has been recorded.
//
// # Safety
// `buffer` must point to at least `capacity` writable bytes, or be null
// (in which case only the length is reported).
size_t decolab_last_error_message(char *buffer, size_t capacity);

// Creates an empty channel set with friction coefficient `mu`.
// Returns null when `mu` is not finite.
struct DecolabChannelSet *decolab_channel_set_new(double mu);

// Appends a channel `V = a p + b x` with complex coefficients.
//
// # Safety
// `set` must be a live handle from [`decolab_channel_set_new`].
enum DecolabStatus decolab_channel_set_push(struct DecolabChannelSet *set,
                                            double a_re,
                                            double a_im,
                                            double b_re,
                                            double b_im);

// Releases a channel set. Null is ignored.
//
// # Safety
// `set` must be a handle from [`decolab_channel_set_new`], not yet freed.
void decolab_channel_set_free(struct DecolabChannelSet *set);

// Maps the channel coefficients onto diffusion coefficients
// `(D_qq, D_pp, D_pq, lambda, mu)`.
//
// # Safety
// `set` must be a live handle; `out` must point to writable storage.
enum DecolabStatus decolab_channels_to_diffusion(const struct DecolabChannelSet *set,
                                                 double hbar,
                                                 struct DecolabDiffusion *out);

// Closed-form first-order entropy production of a squeezed coherent state
// at time `t` (requires `D_pq = 0`).
//
// # Safety
// `out` must point to writable storage.
enum DecolabStatus decolab_entropy_closed(struct DecolabOscillator osc,
                                          struct DecolabState state,
                                          struct DecolabDiffusion diffusion,
                                          double t,
                                          double *out);

// Time-quadrature of the defining entropy-production integral for the
// squeezed coherent state built on `fock_dim` levels. Works for any
// channel set, including `D_pq != 0`. `converged` (optional) reports the
// quadrature convergence flag.
//
// # Safety
// `set` must be a live handle; `out` must point to writable storage;
// `converged` may be null.
enum DecolabStatus decolab_entropy_quadrature(struct DecolabOscillator osc,
                                              struct DecolabState state,
                                              const struct DecolabChannelSet *set,
                                              double t,
                                              size_t fock_dim,
                                              double *out,
                                              int32_t *converged);

// Minimizes the closed-form entropy production over squeezed coherent
// states at time `t` (`D_pq = 0`, `t > 0`).
//
// # Safety
// `out` must point to writable storage.
enum DecolabStatus decolab_sieve_quadratic(struct DecolabOscillator osc,
                                           struct DecolabDiffusion diffusion,
                                           double t,
                                           struct DecolabSieveGrid grid,
                                           struct DecolabSieveResult *out);

// Creates a Gaussian correlation kernel `c(r) = c0 exp(-(r/sigma)^2)`.
// Returns null (with a recorded error) on invalid parameters.
struct DecolabKernel *decolab_kernel_gaussian_new(double c0, double sigma);

// Creates a tabulated spectral-density kernel from `len` samples of a
// symmetric wavenumber grid and nonnegative weights. Returns null (with a
// recorded error) on invalid data.
//
// # Safety
// `k` and `weight` must point to at least `len` readable doubles.
struct DecolabKernel *decolab_kernel_tabulated_new(const double *k,
                                                   const double *weight,
                                                   size_t len);

// Releases a kernel. Null is ignored.
//
// # Safety
// `kernel` must be a handle from one of the kernel constructors, not yet
// freed.
void decolab_kernel_free(struct DecolabKernel *kernel);

// Spatial correlation `c(r)`.
//
// # Safety
// `kernel` must be a live handle; `out` must point to writable storage.
enum DecolabStatus decolab_correlation(const struct DecolabKernel *kernel,
                                       double hbar,
                                       double r,
                                       double *out);

// Decoherence rate `g(r) = (2/hbar^2)(c(0) - c(r))`.
//
// # Safety
// `kernel` must be a live handle; `out` must point to writable storage.
enum DecolabStatus decolab_decoherence_g(const struct DecolabKernel *kernel,
                                         double hbar,
                                         double r,
                                         double *out);

// Universal short-correlation entropy-production ceiling `2 c(0) t / hbar^2`.
//
// # Safety
// `kernel` must be a live handle; `out` must point to writable storage.
enum DecolabStatus decolab_short_correlation_limit(const struct DecolabKernel *kernel,
                                                   double hbar,
                                                   double t,
                                                   double *out);

// Spread (standard deviation) of the normalized spectral density.
//
// # Safety
// `kernel` must be a live handle; `out` must point to writable storage.
enum DecolabStatus decolab_spectral_width(const struct DecolabKernel *kernel, double *out);

// Effective pure-position-decoherence coefficients of the wide-kernel
// regime.
//
// # Safety
// `kernel` must be a live handle; `out` must point to writable storage.
enum DecolabStatus decolab_long_correlation_map(const struct DecolabKernel *kernel,
                                                double hbar,
                                                struct DecolabDiffusion *out);

// Entropy production of a squeezed coherent state under correlated noise
// at time `t`. `converged` (optional) reports the quadrature flag.
//
// # Safety
// `kernel` must be a live handle; `out` must point to writable storage;
// `converged` may be null.
enum DecolabStatus decolab_entropy_correlated(struct DecolabOscillator osc,
                                              struct DecolabState state,
                                              const struct DecolabKernel *kernel,
                                              double t,
                                              double *out,
                                              int32_t *converged);

// Oscillation period `2 pi / omega`, or NaN for invalid parameters.
double decolab_oscillator_period(struct DecolabOscillator osc);

// Library version as a static nul-terminated string.
const char *decolab_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DECOLAB_H */
