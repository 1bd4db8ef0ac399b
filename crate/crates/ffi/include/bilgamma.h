#ifndef BILGAMMA_H
#define BILGAMMA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum BgStatus {
  BG_STATUS_OK = 0,
  // An argument is outside its domain.
  BG_STATUS_INVALID_ARGUMENT = 1,
  BG_STATUS_NULL_POINTER = 2,
  // The requested measure does not exist for these parameters.
  BG_STATUS_NO_SOLUTION = 3,
  // A numerical scheme missed its tolerance.
  BG_STATUS_CONVERGENCE = 4,
  // The operation is not available for this measure.
  BG_STATUS_UNSUPPORTED = 5,
  // Internal error; the library state is unaffected.
  BG_STATUS_PANIC = 6,
} BgStatus;

typedef enum BgMeasureKind {
  BG_MEASURE_KIND_ESSCHER = 0,
  BG_MEASURE_KIND_MEMM = 1,
  BG_MEASURE_KIND_BILATERAL_ESSCHER = 2,
  // Needs the exponent `p > 1`.
  BG_MEASURE_KIND_P_OPTIMAL = 3,
  BG_MEASURE_KIND_MINIMAL_MARTINGALE = 4,
} BgMeasureKind;

// A solved martingale measure together with the market it was solved for.
typedef struct BgMeasure BgMeasure;

// Physical model and market.
typedef struct BgModel BgModel;

// Parameters of one bilateral Gamma law.
typedef struct BgParams {
  double alpha_plus;
  double lambda_plus;
  double alpha_minus;
  double lambda_minus;
} BgParams;

// Summary of a solved measure.
//
// `theta_plus`/`theta_minus` hold Θ for Esscher and ϑ for the minimal
// entropy measure (twice), the tilt pair for bilateral and p-optimal
// measures, and `c` for the minimal martingale measure.
typedef struct BgMeasureInfo {
  enum BgMeasureKind kind;
  double theta_plus;
  double theta_minus;
  // Relative entropy or p-distance; NaN when not defined.
  double objective;
  // Bilateral Gamma components of the risk-neutral law; 0 for the
  // minimal entropy measure, whose law is not in the class.
  size_t n_components;
} BgMeasureInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a model. Rates are per unit of model time with `r ≥ q ≥ 0`.
//
// # Safety
// `out` must be null or valid for writing one pointer.
enum BgStatus bg_model_new(struct BgParams params,
                           double r,
                           double q,
                           double s0,
                           struct BgModel **out);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must be null or a pointer from [`bg_model_new`] not yet freed.
void bg_model_free(struct BgModel *model);

// Cumulant `Ψ(z) = ln E[e^{zX₁}]` for `z ∈ (−λ⁻, λ⁺)`.
//
// # Safety
// `model` must be a live handle and `out` valid for writing.
enum BgStatus bg_model_cumulant(const struct BgModel *model, double z, double *out);

// Solves for a martingale measure with default solver settings. `kind` is
// a `BgMeasureKind` value; `p` is read only for the p-optimal measure.
//
// # Safety
// `model` must be a live handle and `out` valid for writing one pointer.
enum BgStatus bg_solve_measure(const struct BgModel *model,
                               int kind,
                               double p,
                               struct BgMeasure **out);

// Releases a measure. Null is ignored.
//
// # Safety
// `measure` must be null or a pointer from [`bg_solve_measure`] not yet freed.
void bg_measure_free(struct BgMeasure *measure);

// # Safety
// `measure` must be a live handle and `out` valid for writing.
enum BgStatus bg_measure_info(const struct BgMeasure *measure, struct BgMeasureInfo *out);

// Parameters of component `index` of the risk-neutral law.
//
// # Safety
// `measure` must be a live handle and `out` valid for writing.
enum BgStatus bg_measure_component(const struct BgMeasure *measure,
                                   size_t index,
                                   struct BgParams *out);

// European option price under the measure, with the default contour.
// Fails with [`BgStatus::Unsupported`] for the minimal entropy measure.
//
// # Safety
// `measure` must be a live handle and `out` valid for writing.
enum BgStatus bg_price(const struct BgMeasure *measure,
                       double strike,
                       double maturity,
                       int is_put,
                       double *out);

// Black-Scholes implied volatility of an option price.
//
// # Safety
// `out` must be valid for writing.
enum BgStatus bg_implied_vol(int is_put,
                             double price,
                             double s0,
                             double strike,
                             double maturity,
                             double r,
                             double q,
                             double *out);

// Quadratic hedge ratio at time `t` and spot `spot` under the minimal
// martingale measure of the model.
//
// # Safety
// `model` must be a live handle and `out` valid for writing.
enum BgStatus bg_hedge_delta(const struct BgModel *model,
                             double strike,
                             double maturity,
                             double t,
                             double spot,
                             int is_put,
                             double *out);

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next failing call on the same thread.
const char *bg_last_error(void);

// Library version as a static NUL-terminated string.
const char *bg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BILGAMMA_H */
