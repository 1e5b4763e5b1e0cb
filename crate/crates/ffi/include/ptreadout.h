#ifndef PTREADOUT_H
#define PTREADOUT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define PTREADOUT_BRANCH_ABSENT 0

#define PTREADOUT_BRANCH_GROUND 1

#define PTREADOUT_BRANCH_EXCITED 2

typedef enum PtreadoutStatus {
  PTREADOUT_STATUS_OK = 0,
  PTREADOUT_STATUS_NULL_POINTER = 1,
  PTREADOUT_STATUS_INVALID_ARGUMENT = 2,
  PTREADOUT_STATUS_INVALID_PARAMS = 3,
  PTREADOUT_STATUS_NUMERICAL_FAILURE = 4,
  PTREADOUT_STATUS_IO_ERROR = 5,
  PTREADOUT_STATUS_BUFFER_TOO_SMALL = 6,
  PTREADOUT_STATUS_PANIC = 7,
} PtreadoutStatus;

/**
 * Opaque system-parameter handle.
 */
typedef struct PtreadoutParams PtreadoutParams;

typedef struct PtreadoutComplex {
  double re;
  double im;
} PtreadoutComplex;

/**
 * Exceptional point of the qubit-free chain.
 */
typedef struct PtreadoutEp {
  double coupling;
  /**
   * Number of coalescing eigenvalues.
   */
  size_t order;
  struct PtreadoutComplex value;
  double gap;
  /**
   * True when the location is exact rather than searched.
   */
  bool analytic;
} PtreadoutEp;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread (empty after success).
 *
 * The pointer stays valid until the next library call on the same thread.
 */
const char *ptreadout_last_error(void);

/**
 * Library version, a static string.
 */
const char *ptreadout_version(void);

/**
 * New handle with the default two-cavity parameters (`J_1 = 0`).
 */
struct PtreadoutParams *ptreadout_params_new(void);

/**
 * New handle with a built-in scenario's parameters, or null if unknown.
 *
 * # Safety
 * `name` must be null or a NUL-terminated string.
 */
struct PtreadoutParams *ptreadout_params_from_preset(const char *name);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void ptreadout_params_free(struct PtreadoutParams *p);

/**
 * Sets a field by name. `n_cavities` takes an integral value and
 * `lossy_auxiliaries` treats any non-zero value as true. The handle is not
 * validated until it is used.
 *
 * # Safety
 * `p` must be a live handle and `field` a NUL-terminated string.
 */
enum PtreadoutStatus ptreadout_params_set(struct PtreadoutParams *p,
                                          const char *field,
                                          double value);

/**
 * Reads a field by name into `out`.
 *
 * # Safety
 * `p` must be a live handle, `field` a NUL-terminated string and `out` writable.
 */
enum PtreadoutStatus ptreadout_params_get(const struct PtreadoutParams *p,
                                          const char *field,
                                          double *out);

/**
 * Complex dispersive shift of the passive cavity for one qubit branch.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum PtreadoutStatus ptreadout_dispersive_shift(const struct PtreadoutParams *p,
                                                uint32_t branch_code,
                                                struct PtreadoutComplex *out);

/**
 * Eigenvalues of the effective Hamiltonian (one per cavity).
 *
 * `*written` receives the number of eigenvalues; if `capacity` is too
 * small nothing else is written and `BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `p` must be a live handle, `out` must point to `capacity` writable
 * elements and `written` must be writable.
 */
enum PtreadoutStatus ptreadout_eigenvalues(const struct PtreadoutParams *p,
                                           uint32_t branch_code,
                                           struct PtreadoutComplex *out,
                                           size_t capacity,
                                           size_t *written);

/**
 * Transmission coefficient at probe detuning `omega`. `near_singular` may
 * be null; otherwise it is set when the denominator is below `1e-9 kappa_a`.
 *
 * # Safety
 * `p` must be a live handle, `out` writable, `near_singular` null or writable.
 */
enum PtreadoutStatus ptreadout_s21(const struct PtreadoutParams *p,
                                   uint32_t branch_code,
                                   double omega,
                                   struct PtreadoutComplex *out,
                                   bool *near_singular);

/**
 * Exceptional point of the qubit-free chain along `J_1` (with `J_2 = J_1`
 * for three cavities that start with equal couplings).
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum PtreadoutStatus ptreadout_find_ep(const struct PtreadoutParams *p, struct PtreadoutEp *out);

/**
 * Runs a preset (by name) or a TOML scenario file (by path) and writes its
 * outputs into `out_dir`.
 *
 * # Safety
 * Both arguments must be NUL-terminated strings.
 */
enum PtreadoutStatus ptreadout_run_scenario(const char *target, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PTREADOUT_H */
