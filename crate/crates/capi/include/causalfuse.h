/* C interface for the causalfuse structure-learning library. */

#ifndef CAUSALFUSE_H
#define CAUSALFUSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of a C-ABI call.
 */
typedef enum CfStatus {
  /**
   * The call succeeded.
   */
  CfOk = 0,
  /**
   * A pointer argument was null or an option value was out of range.
   */
  CfInvalidArgument = 1,
  /**
   * The input data failed validation (bad manifest, CSV, or targets).
   */
  CfValidation = 2,
  /**
   * An unexpected internal failure; see `cf_last_error`.
   */
  CfInternal = 4,
} CfStatus;

/**
 * An in-memory observational + interventional dataset collection.
 */
typedef struct CfBundle CfBundle;

/**
 * The output of a learning run: the PAG and per-edge probabilities.
 */
typedef struct CfResult CfResult;

/**
 * Tuning options for `cf_learn`. Initialize with `cf_options_default`
 * before overriding individual fields.
 */
typedef struct CfOptions {
  /**
   * Significance threshold for the conditional-independence tests.
   */
  double significance;
  /**
   * Posterior cut-off above which an edge direction is accepted.
   */
  double cutoff;
  /**
   * Maximum separating-set size during skeleton search.
   */
  uint32_t max_sepset;
  /**
   * Equivalent sample size of the BDeu score.
   */
  double ess;
  /**
   * Bit mask of active prior factors: bit 0 = occurrence rates,
   * bit 1 = separating-set ratios, bit 2 = interventional score changes.
   */
  uint32_t factors;
} CfOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread; never free it.
 */
const char *cf_last_error(void);

/**
 * Library version as a static string; never free it.
 */
const char *cf_version(void);

/**
 * Fill `out` with the default learning options.
 *
 * # Safety
 * `out` must be a valid pointer or null.
 */
enum CfStatus cf_options_default(struct CfOptions *out);

/**
 * Load a dataset bundle from a manifest file (UTF-8 path). On success
 * writes a handle to `out`; release it with `cf_bundle_free`.
 *
 * # Safety
 * `manifest_path` must be a valid NUL-terminated string and `out` a
 * valid pointer.
 */
enum CfStatus cf_bundle_load(const char *manifest_path, struct CfBundle **out);

/**
 * Number of observed variables in the bundle, or 0 for a null handle.
 *
 * # Safety
 * `bundle` must be a live handle from `cf_bundle_load` or null.
 */
uint32_t cf_bundle_num_vars(const struct CfBundle *bundle);

/**
 * Release a bundle handle. Null is a no-op.
 *
 * # Safety
 * `bundle` must be a live handle from `cf_bundle_load` or null; it must
 * not be used afterwards.
 */
void cf_bundle_free(struct CfBundle *bundle);

/**
 * Run the learning pipeline on a bundle. `options` may be null for the
 * defaults. On success writes a handle to `out`; release it with
 * `cf_result_free`.
 *
 * # Safety
 * `bundle` must be a live handle; `options` null or valid; `out` valid.
 */
enum CfStatus cf_learn(const struct CfBundle *bundle,
                       const struct CfOptions *options,
                       struct CfResult **out);

/**
 * The learnt graph in the line-per-edge text format. Free the returned
 * string with `cf_string_free`; returns null for a null handle.
 *
 * # Safety
 * `result` must be a live handle from `cf_learn` or null.
 */
char *cf_result_graph_text(const struct CfResult *result);

/**
 * Per-edge factor and posterior table as a JSON document. Free the
 * returned string with `cf_string_free`; returns null for a null handle.
 *
 * # Safety
 * `result` must be a live handle from `cf_learn` or null.
 */
char *cf_result_edge_probs_json(const struct CfResult *result);

/**
 * Release a result handle. Null is a no-op.
 *
 * # Safety
 * `result` must be a live handle from `cf_learn` or null; it must not be
 * used afterwards.
 */
void cf_result_free(struct CfResult *result);

/**
 * Release a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must have been returned by this library and not freed before.
 */
void cf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAUSALFUSE_H */
