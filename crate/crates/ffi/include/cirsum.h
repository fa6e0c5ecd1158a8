#ifndef CIRSUM_H
#define CIRSUM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum CirsumStatus {
  CIRSUM_STATUS_OK = 0,
  CIRSUM_STATUS_NULL_POINTER = 1,
  CIRSUM_STATUS_DOMAIN = 2,
  CIRSUM_STATUS_FELLER = 3,
  CIRSUM_STATUS_BUDGET = 4,
  CIRSUM_STATUS_NON_CONVERGENCE = 5,
  CIRSUM_STATUS_QUADRATURE = 6,
  CIRSUM_STATUS_DEGENERATE = 7,
  CIRSUM_STATUS_INVALID_ARGUMENT = 8,
  CIRSUM_STATUS_PANIC = 9,
} CirsumStatus;

// Poisson truncation method.
typedef enum CirsumTrunc {
  CIRSUM_TRUNC_TAIL = 0,
  CIRSUM_TRUNC_NORMAL = 1,
  CIRSUM_TRUNC_WINDOW = 2,
} CirsumTrunc;

// Opaque model handle.
typedef struct CirsumModel CirsumModel;

// One CIR factor as plain data.
typedef struct CirsumFactor {
  double kappa;
  double theta;
  double sigma;
  double x0;
  double weight;
} CirsumFactor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
const char *cirsum_last_error(void);

// Build a model. On success `*out` owns a handle to pass to
// [`cirsum_model_free`].
//
// # Safety
// `out` must be null or valid for writing one pointer.
enum CirsumStatus cirsum_model_new(struct CirsumFactor f1,
                                   struct CirsumFactor f2,
                                   double dt,
                                   struct CirsumModel **out);

// Release a handle. Null is ignored.
//
// # Safety
// `m` must be null or a handle from [`cirsum_model_new`] not yet freed.
void cirsum_model_free(struct CirsumModel *m);

// Density at `n` points `xs[i] > 0`. `bounds` may be null.
//
// # Safety
// `xs`, `values` and a non-null `bounds` must each hold `n` doubles.
enum CirsumStatus cirsum_pdf(const struct CirsumModel *m,
                             const double *xs,
                             size_t n,
                             enum CirsumTrunc trunc,
                             double eps,
                             double *values,
                             double *bounds);

// CDF at `n` points `xs[i] >= 0`. `bounds` may be null.
//
// # Safety
// As for [`cirsum_pdf`].
enum CirsumStatus cirsum_cdf(const struct CirsumModel *m,
                             const double *xs,
                             size_t n,
                             enum CirsumTrunc trunc,
                             double eps,
                             double *values,
                             double *bounds);

// Closed-form mean and variance.
//
// # Safety
// `mean` and `variance` must be valid for writing.
enum CirsumStatus cirsum_moments(const struct CirsumModel *m, double *mean, double *variance);

// `E[exp(-u S)]` in closed form, for `u` above the pole.
//
// # Safety
// `value` must be valid for writing.
enum CirsumStatus cirsum_laplace(const struct CirsumModel *m, double u, double *value);

// `n` exact draws of the sum, deterministic in `seed`.
//
// # Safety
// `out` must hold `n` doubles.
enum CirsumStatus cirsum_simulate(const struct CirsumModel *m,
                                  size_t n,
                                  uint64_t seed,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CIRSUM_H */
