#ifndef BFN_H
#define BFN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Theory comparison selector for [`bfn_report_oracle`].
 */
typedef enum BfnOracle {
  BFN_ORACLE_THEOREM1 = 0,
  BFN_ORACLE_THEOREM4 = 1,
  BFN_ORACLE_THEOREM6 = 2,
  BFN_ORACLE_PROPOSITION7 = 3,
} BfnOracle;

/**
 * Result of every call.
 */
typedef enum BfnStatus {
  BFN_STATUS_OK = 0,
  BFN_STATUS_INVALID_ARGUMENT = 1,
  BFN_STATUS_UNSUPPORTED_REGIME = 2,
  BFN_STATUS_TRUNCATION = 3,
  BFN_STATUS_CROSSING = 4,
  BFN_STATUS_STABILITY = 5,
  BFN_STATUS_POSITIVITY = 6,
  BFN_STATUS_NO_ORACLE = 7,
  BFN_STATUS_CONFIG = 8,
  BFN_STATUS_IO = 9,
  BFN_STATUS_NULL_POINTER = 10,
  BFN_STATUS_PANIC = 11,
} BfnStatus;

/**
 * A parsed run configuration.
 */
typedef struct BfnConfigHandle BfnConfigHandle;

/**
 * The outcome of a BFN run.
 */
typedef struct BfnReportHandle BfnReportHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *bfn_last_error_message(void);

/**
 * Parses `key = value` configuration text.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum BfnStatus bfn_config_from_text(const char *text, struct BfnConfigHandle **out);

/**
 * # Safety
 * `handle` must come from [`bfn_config_from_text`] and not be freed twice.
 */
void bfn_config_free(struct BfnConfigHandle *handle);

/**
 * Runs the configured iterations.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum BfnStatus bfn_run(const struct BfnConfigHandle *config, struct BfnReportHandle **out);

/**
 * # Safety
 * `handle` must come from [`bfn_run`] and not be freed twice.
 */
void bfn_report_free(struct BfnReportHandle *handle);

/**
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum BfnStatus bfn_report_iterations(const struct BfnReportHandle *report, uintptr_t *out);

/**
 * Norms `||w(0)||`, `||w(T)||`, `||w~(0)||` of iteration `index` (0-based).
 *
 * # Safety
 * `report` must be a live handle; the outputs must be valid pointers.
 */
enum BfnStatus bfn_report_norms(const struct BfnReportHandle *report,
                                uintptr_t index,
                                double *w0,
                                double *wt,
                                double *wtilde0);

/**
 * Number of grid nodes in the decrease-rate profile.
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum BfnStatus bfn_report_profile_len(const struct BfnReportHandle *report, uintptr_t *out);

/**
 * Copies nodes and decrease rates; excluded nodes get NaN.
 *
 * # Safety
 * `x` and `rate` must point to `len` writable doubles, `len` equal to
 * [`bfn_report_profile_len`].
 */
enum BfnStatus bfn_report_profile(const struct BfnReportHandle *report,
                                  double *x,
                                  double *rate,
                                  uintptr_t len);

/**
 * Deviation from a closed form; `NoOracle` when the run has none.
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum BfnStatus bfn_report_oracle(const struct BfnReportHandle *report,
                                 enum BfnOracle case_,
                                 double *out);

/**
 * The report as JSON (without the profile). Free with [`bfn_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum BfnStatus bfn_report_to_json(const struct BfnReportHandle *report, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void bfn_string_free(char *s);

/**
 * `max_n ln|b_n| / n^2` for `a_n = n^-2`, `n <= N`; writes NaN when every
 * coefficient vanishes.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum BfnStatus bfn_bn_max_growth(double k,
                                 double kp,
                                 double nu,
                                 double t,
                                 uintptr_t n,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BFN_H */
