#ifndef RLAB_H
#define RLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum RlabStatus {
    RLAB_STATUS_OK = 0,
    // A required pointer argument was null.
    RLAB_STATUS_NULL_POINTER = 1,
    // A string argument was not UTF-8.
    RLAB_STATUS_INVALID_UTF8 = 2,
    // The config or operator table was rejected.
    RLAB_STATUS_CONFIG = 3,
    // A vector length did not match the operator dimension.
    RLAB_STATUS_DIMENSION_MISMATCH = 4,
    // Computation failed (cap exceeded, non-finite result, I/O).
    RLAB_STATUS_RUNTIME = 5,
    // A scenario ran and at least one check failed.
    RLAB_STATUS_CHECK_FAILED = 6,
    // A Rust panic was caught at the boundary.
    RLAB_STATUS_PANIC = 7,
} RlabStatus;

// Opaque operator handle.
typedef struct RlabOperator RlabOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next rlab call on the same thread.
const char *rlab_last_error(void);

// Library version as a static NUL-terminated string.
const char *rlab_version(void);

// Parses an operator table (the body of an `[operator]` section) and stores
// a new handle in `*out`.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a valid pointer.
enum RlabStatus rlab_operator_from_toml(const char *toml, struct RlabOperator **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `op` must come from [`rlab_operator_from_toml`] and not be used afterwards.
void rlab_operator_free(struct RlabOperator *op);

// Truncation dimension of the operator; 0 for a null handle.
//
// # Safety
// `op` must be null or a live handle.
size_t rlab_operator_dim(const struct RlabOperator *op);

// Whether the operator maps real vectors to real vectors.
//
// # Safety
// `op` must be null or a live handle.
bool rlab_operator_is_real(const struct RlabOperator *op);

// `T^power x` for `x = re + i·im` of length `len`. `im` may be null for a
// real input; `out_im` may be null when the result is real. `power = 1`
// applies the operator once.
//
// # Safety
// Non-null arrays must hold `len` doubles; `op` must be a live handle.
enum RlabStatus rlab_operator_apply_power(const struct RlabOperator *op,
                                          const double *re,
                                          const double *im,
                                          size_t len,
                                          uint64_t power,
                                          double *out_re,
                                          double *out_im);

// `T x`; see [`rlab_operator_apply_power`].
//
// # Safety
// As for [`rlab_operator_apply_power`].
enum RlabStatus rlab_operator_apply(const struct RlabOperator *op,
                                    const double *re,
                                    const double *im,
                                    size_t len,
                                    double *out_re,
                                    double *out_im);

// Operator norm estimate: exact up to power-iteration tolerance for `p = 2`,
// a sampled lower bound otherwise.
//
// # Safety
// `op` must be a live handle and `out` a valid pointer.
enum RlabStatus rlab_operator_norm_estimate(const struct RlabOperator *op, double *out);

// Norm of `re + i·im` in `ℓ^p` (or `c0` for `p = +inf`).
//
// # Safety
// Non-null arrays must hold `len` doubles; `out` must be valid.
enum RlabStatus rlab_vector_norm(const double *re,
                                 const double *im,
                                 size_t len,
                                 double p,
                                 double *out);

// `‖x + iy‖ = sup_t ‖cos(t)x − sin(t)y‖` for real `x`, `y`.
//
// # Safety
// `x` and `y` must hold `len` doubles; `out` must be valid.
enum RlabStatus rlab_complexification_norm(const double *x,
                                           const double *y,
                                           size_t len,
                                           double p,
                                           double *out);

// Runs a scenario from a config file, writing artifacts into `out_dir`.
// Returns `CheckFailed` when the scenario ran but a check failed; the
// report is written either way. `passed` may be null.
//
// # Safety
// String arguments must be NUL-terminated; `passed` must be null or valid.
enum RlabStatus rlab_run_scenario(const char *scenario,
                                  const char *config_path,
                                  const char *out_dir,
                                  int *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RLAB_H */
