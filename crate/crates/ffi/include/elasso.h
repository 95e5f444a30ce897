#ifndef ELASSO_H
#define ELASSO_H

/* Generated by cbindgen; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result of every call.
typedef enum ElassoStatus {
  ELASSO_STATUS_OK = 0,
  ELASSO_STATUS_NULL_POINTER = 1,
  // Invalid input: bad lengths, orderings, weights or tuning values.
  ELASSO_STATUS_INVALID_INPUT = 2,
  // Numerical failure such as a singular covariance.
  ELASSO_STATUS_NUMERIC = 3,
  // An output array is shorter than required.
  ELASSO_STATUS_BUFFER_TOO_SMALL = 4,
  // A Rust panic was caught at the boundary.
  ELASSO_STATUS_PANIC = 5,
} ElassoStatus;

// Opaque solution path.
typedef struct ElassoPathHandle ElassoPathHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds the full path for nonincreasing eigenvalues `d` and weights `a`,
// both of length `q`.
//
// # Safety
// `d` and `a` must point to `q` readable values and `out` to writable storage.
enum ElassoStatus elasso_path_new(const double *d,
                                  const double *a,
                                  size_t q,
                                  struct ElassoPathHandle **out);

// Builds the path restricted to the model with `groups` group sizes.
//
// # Safety
// As [`elasso_path_new`]; `sizes` must point to `groups` readable values.
enum ElassoStatus elasso_path_new_model(const double *d,
                                        const double *a,
                                        size_t q,
                                        const size_t *sizes,
                                        size_t groups,
                                        struct ElassoPathHandle **out);

// Releases a path. Null is ignored.
//
// # Safety
// `path` must come from this library and not be used afterwards.
void elasso_path_free(struct ElassoPathHandle *path);

// Dimension of the path, or 0 for a null handle.
//
// # Safety
// `path` must be null or a live handle.
size_t elasso_path_dim(const struct ElassoPathHandle *path);

// Writes the `q - 1` knots, nondecreasing; knots that never occur are `INFINITY`.
//
// # Safety
// `out` must point to `len` writable values.
enum ElassoStatus elasso_path_knots(const struct ElassoPathHandle *path, double *out, size_t len);

// Writes the `q - 1` merge positions (0-based group index within the
// partition being merged).
//
// # Safety
// `out` must point to `len` writable values.
enum ElassoStatus elasso_path_merge_indices(const struct ElassoPathHandle *path,
                                            size_t *out,
                                            size_t len);

// Writes the `q` penalized eigenvalues at `eta`.
//
// # Safety
// `out` must point to `len` writable values.
enum ElassoStatus elasso_path_solve(const struct ElassoPathHandle *path,
                                    double eta,
                                    double *out,
                                    size_t len);

// Penalty value of the estimate at `eta`.
//
// # Safety
// `out` must point to one writable value.
enum ElassoStatus elasso_path_kappa(const struct ElassoPathHandle *path, double eta, double *out);

// Estimate under the constraint `penalty <= kappa`, with its tuning value.
//
// # Safety
// `eta_out` must point to one writable value, `lambda_out` to `len`.
enum ElassoStatus elasso_path_constrained_solve(const struct ElassoPathHandle *path,
                                                double kappa,
                                                double *eta_out,
                                                double *lambda_out,
                                                size_t len);

// Marčenko-Pastur weights for dimension `q` and sample size `n > q`.
//
// # Safety
// `out` must point to `len` writable values.
enum ElassoStatus elasso_mp_weights(size_t q, size_t n, double *out, size_t len);

// Eigenvalues (nonincreasing) of the sample covariance, divisor `n`, of
// the row-major `n x q` matrix `data`.
//
// # Safety
// `data` must point to `n * q` readable values, `out` to `len` writable.
enum ElassoStatus elasso_sample_eigenvalues(const double *data,
                                            size_t n,
                                            size_t q,
                                            double *out,
                                            size_t len);

// Copies the last error of this thread into `buf` (nul-terminated,
// truncated to `len`) and returns the full message length, 0 if none.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t elasso_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELASSO_H */
