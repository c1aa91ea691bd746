#ifndef HALLMECH_H
#define HALLMECH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Reserve policy selector for [`hm_exact_two_buyer_revenue`].
typedef enum HmPolicy {
  HM_POLICY_SPA_IGNORE = 0,
  HM_POLICY_SIGNAL_EAGER = 1,
  // Uses the `k` argument.
  HM_POLICY_K_UNCAPPED = 2,
} HmPolicy;

// Pricing regime reported by [`hm_optimal_price`].
typedef enum HmRegime {
  HM_REGIME_IGNORE = 0,
  HM_REGIME_FOLLOW = 1,
  HM_REGIME_CAP = 2,
  HM_REGIME_FOLLOW_AGAIN = 3,
  HM_REGIME_UNCLASSIFIED = 4,
} HmRegime;

// Result code of every fallible call.
typedef enum HmStatus {
  HM_STATUS_OK = 0,
  HM_STATUS_INVALID_PARAMETER = 1,
  HM_STATUS_PARSE = 2,
  HM_STATUS_CONFIG = 3,
  HM_STATUS_NOT_REGULAR = 4,
  HM_STATUS_NOT_LOG_CONCAVE = 5,
  HM_STATUS_NUMERICAL = 6,
  HM_STATUS_SINGULAR = 7,
  HM_STATUS_UNRESOLVED_HYBRID = 8,
  HM_STATUS_NULL_POINTER = 9,
  HM_STATUS_PANIC = 10,
} HmStatus;

// Opaque prior distribution.
typedef struct HmPrior HmPrior;

// Opaque ironed virtual value for one `(prior, gamma, signal)`.
typedef struct HmVirtual HmVirtual;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL
// terminated, truncated to `len` bytes) and returns the length of the full
// message excluding the terminator; 0 when no error was recorded.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t hm_last_error_message(char *buf, size_t len);

// Parses a prior token such as `beta:5,1` into a new handle.
//
// # Safety
// `token` must be a NUL-terminated string and `out_prior` writable.
enum HmStatus hm_prior_parse(const char *token, struct HmPrior **out_prior);

// Releases a prior handle; null is ignored.
//
// # Safety
// `prior` must come from [`hm_prior_parse`] and not be used afterwards.
void hm_prior_free(struct HmPrior *prior);

// Support `[lo, hi]` of the prior.
//
// # Safety
// Pointers must be valid.
enum HmStatus hm_prior_support(const struct HmPrior *prior, double *lo, double *hi);

// Cumulative distribution function at `v`.
//
// # Safety
// Pointers must be valid.
enum HmStatus hm_prior_cdf(const struct HmPrior *prior, double v, double *result);

// End of the ironed interval that starts at the signal.
//
// # Safety
// Pointers must be valid.
enum HmStatus hm_compute_threshold(const struct HmPrior *prior,
                                   double gamma,
                                   double signal,
                                   double *result);

// Builds the ironed virtual value of the posterior for `signal`.
//
// # Safety
// Pointers must be valid.
enum HmStatus hm_virtual_new(const struct HmPrior *prior,
                             double gamma,
                             double signal,
                             size_t grid_size,
                             struct HmVirtual **out_virtual);

// Releases a virtual-value handle; null is ignored.
//
// # Safety
// `psi` must come from [`hm_virtual_new`] and not be used afterwards.
void hm_virtual_free(struct HmVirtual *psi);

// Ironed virtual value at `v`.
//
// # Safety
// Pointers must be valid.
enum HmStatus hm_virtual_eval(const struct HmVirtual *psi, double v, double *result);

// Smallest value whose ironed virtual value reaches `z`; `+inf` if none.
//
// # Safety
// Pointers must be valid.
enum HmStatus hm_virtual_pseudo_inverse(const struct HmVirtual *psi, double z, double *result);

// The threshold `T` stored in the handle.
//
// # Safety
// Pointers must be valid.
enum HmStatus hm_virtual_threshold(const struct HmVirtual *psi, double *result);

// Optimal posted price and its regime. Priors outside the regime theory
// fall back to a grid search and report `HM_REGIME_UNCLASSIFIED`.
//
// # Safety
// Pointers must be valid.
enum HmStatus hm_optimal_price(const struct HmPrior *prior,
                               double gamma,
                               double signal,
                               size_t grid_size,
                               double *price,
                               enum HmRegime *regime);

// Runs an eager second-price auction. `winner` is -1 when nothing sells.
//
// # Safety
// `values` and `reserves` must point to `n` doubles; outputs writable.
enum HmStatus hm_eager_run(const double *values,
                           const double *reserves,
                           size_t n,
                           int64_t *winner,
                           double *payment);

// Expected two-buyer eager revenue given both signals.
//
// # Safety
// Pointers must be valid.
enum HmStatus hm_exact_two_buyer_revenue(const struct HmPrior *prior,
                                         double gamma,
                                         double signal_1,
                                         double signal_2,
                                         enum HmPolicy policy,
                                         size_t k,
                                         size_t grid_size,
                                         double *result);

// Revenue of the full-surplus mechanism for the two-point prior.
//
// # Safety
// `revenue` must be writable.
enum HmStatus hm_full_surplus_revenue(double alpha, double gamma, double epsilon, double *revenue);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HALLMECH_H */
