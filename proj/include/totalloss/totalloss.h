/*
 * totalloss C API.
 *
 * Total-loss accuracy metrics for nonnegative cross-sectional predictions.
 * All objects are opaque handles created and released through this API.
 * Every fallible call returns a tl_status; on failure a human-readable
 * message is available from tl_last_error() on the calling thread until the
 * next failing call on that thread.
 */
#ifndef TOTALLOSS_H
#define TOTALLOSS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TOTALLOSS_BUILDING)
#    define TL_API __declspec(dllexport)
#  else
#    define TL_API __declspec(dllimport)
#  endif
#else
#  define TL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tl_status {
  TL_OK = 0,
  TL_ERR_INVALID_ARGUMENT = 1,
  TL_ERR_NON_FINITE_INPUT = 2,
  TL_ERR_NEGATIVE_INPUT = 3,
  TL_ERR_ZERO_ACTUAL = 4,
  TL_ERR_EMPTY_AFTER_FILTERING = 5,
  TL_ERR_EMPTY_VECTOR = 6,
  TL_ERR_Q_OUT_OF_RANGE = 7,
  TL_ERR_LENGTH_MISMATCH = 8,
  TL_ERR_NEGATIVE_COEFFICIENT = 9,
  TL_ERR_LOG_OF_NON_POSITIVE = 10,
  TL_ERR_TRANSFORM_DOMAIN = 11,
  TL_ERR_NON_POSITIVE_LOSS = 12,
  TL_ERR_TAG_MISMATCH = 13,
  TL_ERR_DEGENERATE_GRID = 14,
  TL_ERR_NO_NON_MAXIMAL_LOSS = 15,
  TL_ERR_NO_CONSTRUCTION = 16,
  TL_ERR_MISSING_COLUMN = 17,
  TL_ERR_UNKNOWN_COLUMN = 18,
  TL_ERR_NON_NUMERIC_CELL = 19,
  TL_ERR_DUPLICATE_UNIT_ID = 20,
  TL_ERR_EMPTY_FILE = 21,
  TL_ERR_IO = 22,
  TL_ERR_SPEC_SYNTAX = 23,
  TL_ERR_INTERNAL = 99
} tl_status;

/* State of a value that may be one of the infinities. */
typedef enum tl_value_state {
  TL_FINITE = 0,
  TL_POS_INFINITY = 1,
  TL_NEG_INFINITY = 2,
  TL_ABSENT = 3
} tl_value_state;

typedef struct tl_dataset tl_dataset;
typedef struct tl_metric tl_metric;
typedef struct tl_report tl_report;

/* Aggregated total for one prediction column under one metric. `value` and
 * `log_value` are meaningful only when their state is TL_FINITE. log_value
 * is the natural log of value and is present for multiplicative metrics. */
typedef struct tl_total {
  double value;
  tl_value_state value_state;
  double log_value;
  tl_value_state log_state;
  int degenerate;
  size_t n_units;
  size_t n_skipped;
} tl_total;

TL_API const char* tl_status_name(tl_status status);
TL_API const char* tl_last_error(void);
TL_API const char* tl_version(void);

/* ---- datasets ---------------------------------------------------------- */

TL_API tl_status tl_dataset_load_csv(const char* path, tl_dataset** out);
TL_API tl_status tl_dataset_parse_csv(const char* text, size_t length, tl_dataset** out);
TL_API void tl_dataset_free(tl_dataset* dataset);

TL_API size_t tl_dataset_unit_count(const tl_dataset* dataset);
TL_API size_t tl_dataset_column_count(const tl_dataset* dataset);
/* NULL when out of range. Pointers live as long as the dataset. */
TL_API const char* tl_dataset_column_name(const tl_dataset* dataset, size_t column);
TL_API const char* tl_dataset_unit_id(const tl_dataset* dataset, size_t unit);
TL_API tl_status tl_dataset_find_column(const tl_dataset* dataset, const char* name, size_t* column);

/* ---- metrics ----------------------------------------------------------- */

/* "MAPE", "MEDAPE", "RMSE" or "GMAPE" (case-insensitive). */
TL_API tl_status tl_metric_preset(const char* name, tl_metric** out);

/* loss:       "ae" | "se" | "ape" | "spe"
 * aggregator: "additive" | "multiplicative" | "quantile:<q>"
 *             | "ltype[:asc|:desc][:<c1>,<c2>,...]", optionally followed by
 *             "/<transform>" stages. */
TL_API tl_status tl_metric_create(const char* loss, const char* aggregator, tl_metric** out);

/* "skip" | "error"; applies to percentage losses. Default "skip". */
TL_API tl_status tl_metric_set_zero_actual(tl_metric* metric, const char* policy);

/* Replaces the L-type coefficients; fails unless the aggregator is L-type. */
TL_API tl_status tl_metric_set_coefficients(tl_metric* metric, const double* coefficients, size_t count);

/* "none" | "mean" | "geomean" | "root:<p>" | "scale:<s>" | "log:<b>";
 * appended after any existing transforms. */
TL_API tl_status tl_metric_add_transform(tl_metric* metric, const char* transform);

/* Canonical "<loss>/<aggregator spec>" text, or the preset name. */
TL_API const char* tl_metric_name(const tl_metric* metric);
TL_API const char* tl_metric_aggregator(const tl_metric* metric);
TL_API int tl_metric_is_admissible(const tl_metric* metric);
TL_API tl_metric* tl_metric_clone(const tl_metric* metric);
TL_API void tl_metric_free(tl_metric* metric);

/* ---- evaluation -------------------------------------------------------- */

TL_API tl_status tl_evaluate(const tl_dataset* dataset, size_t column, const tl_metric* metric, tl_total* out);

/* Per-unit losses in dataset order. `losses` and `retained` must hold
 * tl_dataset_unit_count() entries; skipped units get retained = 0. */
TL_API tl_status tl_unit_losses(const tl_dataset* dataset, size_t column, const tl_metric* metric,
                                double* losses, uint8_t* retained, size_t capacity);

/* Aggregates an explicit loss vector with the metric's aggregator and
 * transforms (the loss kind is not used). */
TL_API tl_status tl_aggregate(const double* losses, size_t count, const tl_metric* metric, tl_total* out);

/* Element-wise log in `base`; on TL_ERR_NON_POSITIVE_LOSS, *bad_index (if
 * non-NULL) receives the first offending index. */
TL_API tl_status tl_to_log_domain(const double* losses, size_t count, double base, double* out,
                                  size_t* bad_index);

/* -1, 0 or 1. Totals carrying a log value compare in log space; values
 * within rel_tol relative compare equal. */
TL_API int tl_compare_totals(const tl_total* a, const tl_total* b, double rel_tol);

/* ---- verification ------------------------------------------------------ */

/* `suites` is a comma-separated list of suite names or "all". */
TL_API tl_status tl_verify_run(const char* suites, uint64_t seed, size_t trials, tl_report** out);
/* Line-delimited JSON; one object per verdict plus a summary line. */
TL_API const char* tl_report_text(const tl_report* report);
TL_API int tl_report_expectations_met(const tl_report* report);
TL_API size_t tl_report_entry_count(const tl_report* report);
TL_API void tl_report_free(tl_report* report);

/* Comma-separated list of known suite names. */
TL_API const char* tl_verify_suite_names(void);

/* Replays one serialized counterexample (a report line or a bare
 * counterexample object); *reproduced is 1 when both totals match bit for
 * bit. */
TL_API tl_status tl_counterexample_replay(const char* json_line, int* reproduced);

#ifdef __cplusplus
}
#endif

#endif /* TOTALLOSS_H */
