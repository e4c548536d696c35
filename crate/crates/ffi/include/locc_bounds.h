#ifndef LOCC_BOUNDS_H
#define LOCC_BOUNDS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `LB_STATUS_OK` is zero.
 */
typedef enum LbStatus {
  LB_STATUS_OK = 0,
  LB_STATUS_NULL_POINTER = 1,
  LB_STATUS_INVALID_ARGUMENT = 2,
  LB_STATUS_DIMENSION_MISMATCH = 3,
  LB_STATUS_INVALID_STATE = 4,
  LB_STATUS_INVALID_PROBABILITIES = 5,
  LB_STATUS_MEASURE_UNAVAILABLE = 6,
  LB_STATUS_INVALID_INSTRUMENT = 7,
  LB_STATUS_PARSE_ERROR = 8,
  LB_STATUS_SCENARIO_ERROR = 9,
  LB_STATUS_UNSUPPORTED = 10,
  LB_STATUS_INCONSISTENT = 11,
  LB_STATUS_PANIC = 99,
} LbStatus;

typedef enum LbParty {
  LB_PARTY_A = 0,
  LB_PARTY_B = 1,
} LbParty;

typedef enum LbMeasure {
  LB_MEASURE_AUTO = 0,
  LB_MEASURE_ENTROPY_OF_ENTANGLEMENT_PURE = 1,
  LB_MEASURE_EOF_TWO_QUBIT = 2,
} LbMeasure;

/**
 * Opaque bipartite density operator.
 */
typedef struct LbDensity LbDensity;

/**
 * Opaque ensemble of bipartite states.
 */
typedef struct LbEnsemble LbEnsemble;

/**
 * Distillation-yield bounds of a state. Infinite bounds are `INFINITY`.
 */
typedef struct LbDistillationReport {
  double s;
  double s_a;
  double s_b;
  double s_bar_a;
  double dp_bound;
  double dpprime_bound;
  double r_max;
  double hashing_yield;
  double min_pt_eigenvalue;
  bool ppt;
  bool degenerate_spectrum;
} LbDistillationReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next `lb_*` call on the same thread.
 */
const char *lb_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lb_version(void);

/**
 * Validates a `(dim_a·dim_b)²` row-major matrix as a density operator.
 *
 * # Safety
 * `re` (and `im` unless null) must point to `(dim_a·dim_b)²` doubles;
 * `out` must be writable.
 */
enum LbStatus lb_density_new(const double *re,
                             const double *im,
                             size_t dim_a,
                             size_t dim_b,
                             double tol,
                             struct LbDensity **out);

/**
 * `|ψ⟩⟨ψ|` for a vector of length `dim_a·dim_b`; normalized on the way in.
 *
 * # Safety
 * `re` (and `im` unless null) must point to `dim_a·dim_b` doubles; `out`
 * must be writable.
 */
enum LbStatus lb_density_pure(const double *re,
                              const double *im,
                              size_t dim_a,
                              size_t dim_b,
                              struct LbDensity **out);

/**
 * Bell-diagonal state on `d ⊗ d` with weights `probs[a·d + b]`.
 *
 * # Safety
 * `probs` must point to `len` doubles; `out` must be writable.
 */
enum LbStatus lb_density_bell_diagonal(size_t d,
                                       const double *probs,
                                       size_t len,
                                       struct LbDensity **out);

/**
 * Releases a state; null is a no-op.
 *
 * # Safety
 * `rho` must be null or a handle from this library not yet freed.
 */
void lb_density_free(struct LbDensity *rho);

/**
 * # Safety
 * `rho` must be a live handle; the outputs must be writable.
 */
enum LbStatus lb_density_dims(const struct LbDensity *rho, size_t *dim_a, size_t *dim_b);

/**
 * Copies the matrix into row-major `re`/`im` buffers of `(dim_a·dim_b)²` doubles.
 *
 * # Safety
 * `rho` must be a live handle; `re` and `im` must each hold `len` doubles.
 */
enum LbStatus lb_density_matrix(const struct LbDensity *rho, double *re, double *im, size_t len);

/**
 * Von Neumann entropy in bits.
 *
 * # Safety
 * `rho` must be a live handle; `out` must be writable.
 */
enum LbStatus lb_density_entropy(const struct LbDensity *rho, double *out);

/**
 * Entropy of the reduced state of `party` (an `LbParty` value).
 *
 * # Safety
 * `rho` must be a live handle; `out` must be writable.
 */
enum LbStatus lb_density_marginal_entropy(const struct LbDensity *rho, uint32_t party, double *out);

/**
 * PPT test; `min_eigenvalue` receives the smallest eigenvalue of the partial transpose.
 *
 * # Safety
 * `rho` must be a live handle; the outputs must be writable.
 */
enum LbStatus lb_density_is_ppt(const struct LbDensity *rho, bool *ppt, double *min_eigenvalue);

/**
 * Entanglement in ebits under `measure` (an `LbMeasure` value).
 *
 * # Safety
 * `rho` must be a live handle; `out` must be writable.
 */
enum LbStatus lb_density_entanglement(const struct LbDensity *rho, uint32_t measure, double *out);

/**
 * # Safety
 * `rho` must be a live handle; `out` must be writable.
 */
enum LbStatus lb_density_distillation_report(const struct LbDensity *rho,
                                             struct LbDistillationReport *out);

/**
 * Builds an ensemble from `n` probabilities and states; the states are
 * copied, so the caller keeps ownership of its handles.
 *
 * # Safety
 * `probs` and `states` must point to `n` entries each, every state a live
 * handle; `out` must be writable.
 */
enum LbStatus lb_ensemble_new(const double *probs,
                              const struct LbDensity *const *states,
                              size_t n,
                              struct LbEnsemble **out);

/**
 * # Safety
 * `ens` must be null or a handle from this library not yet freed.
 */
void lb_ensemble_free(struct LbEnsemble *ens);

/**
 * Holevo quantity of the global ensemble.
 *
 * # Safety
 * `ens` must be a live handle; `out` must be writable.
 */
enum LbStatus lb_ensemble_holevo(const struct LbEnsemble *ens, double *out);

/**
 * Holevo quantity of the reduced ensemble held by `party` (an `LbParty` value).
 *
 * # Safety
 * `ens` must be a live handle; `out` must be writable.
 */
enum LbStatus lb_ensemble_marginal_holevo(const struct LbEnsemble *ens,
                                          uint32_t party,
                                          double *out);

/**
 * Runs a command (`"bounds-verify"`, `"protocol-run"`, `"distill-report"`,
 * `"entropy"`) on a scenario given as JSON text. The JSON report is
 * returned in `out_json` (free with [`lb_string_free`]) and `out_pass`
 * tells whether every check passed. A NaN `tol` uses the scenario's own.
 *
 * # Safety
 * `scenario_json` and `command` must be NUL-terminated; the outputs must
 * be writable.
 */
enum LbStatus lb_run_scenario_json(const char *scenario_json,
                                   const char *command,
                                   uint64_t seed,
                                   size_t trials,
                                   double tol,
                                   char **out_json,
                                   bool *out_pass);

/**
 * Releases a string returned by this library; null is a no-op.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void lb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCC_BOUNDS_H */
