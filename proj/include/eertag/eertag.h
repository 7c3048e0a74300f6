/* eertag - training NER taggers from partially annotated data.
 *
 * C interface over the C++ core: opaque handles, integer status codes,
 * JSON strings for structured configuration and results. Every function
 * returns EERTAG_OK (0) on success or a nonzero code; eertag_last_error()
 * describes the most recent failure on the calling thread. Strings returned
 * through char** out-parameters are owned by the caller and must be released
 * with eertag_string_free().
 */
#ifndef EERTAG_H
#define EERTAG_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define EERTAG_API __attribute__((visibility("default")))

typedef struct eertag_dataset eertag_dataset;
typedef struct eertag_model eertag_model;

enum {
  EERTAG_OK = 0,
  EERTAG_ERR_INVALID_ARGUMENT = 1,
  EERTAG_ERR_IO = 2,
  EERTAG_ERR_PARSE = 3,
  EERTAG_ERR_UNGRAMMATICAL = 4,
  EERTAG_ERR_NO_VALID_PATH = 5,
  EERTAG_ERR_UNSATISFIABLE = 6,
  EERTAG_ERR_MISSING_GOLD = 7,
  EERTAG_ERR_TARGET_UNREACHABLE = 8,
  EERTAG_ERR_NON_FINITE = 9,
  EERTAG_ERR_SHAPE_MISMATCH = 10,
  EERTAG_ERR_INTERNAL = 99
};

EERTAG_API const char* eertag_version(void);
/* Message for the last failing call on this thread; empty if none. */
EERTAG_API const char* eertag_last_error(void);
EERTAG_API void eertag_string_free(char* text);

/* ---- corpora ----------------------------------------------------------
 * options_json keys (all optional):
 *   "classes": ["PER", ...]      entity classes; default: scanned from file
 *   "mode": "gold"|"raw"|"partial"|"both"
 *   "scheme": "bio"|"biluo"      tag scheme of the gold column
 *   "token_column", "tag_column", "observed_column": ints (-1 = last)
 *   "tab_separated": bool, "docstart_marker": string, "doc_per_block": bool
 */
EERTAG_API int eertag_dataset_read(const char* path, const char* options_json,
                                   eertag_dataset** out);
EERTAG_API int eertag_dataset_write(const eertag_dataset* dataset,
                                    const char* path, const char* options_json);
EERTAG_API void eertag_dataset_free(eertag_dataset* dataset);
/* Documents/sentences/tokens/spans, observation counts, gold entity ratio
 * when gold is present. */
EERTAG_API int eertag_dataset_info(const eertag_dataset* dataset, char** json_out);

/* ---- annotation simulation --------------------------------------------
 * config_json: {"scheme": "nns"|"ee", "seed": int, and per scheme:
 *   nns: "target_recall", "target_precision", "fp_span_max_len"
 *   ee:  "total_budget", "per_doc_cap", "keep_prob"}
 */
EERTAG_API int eertag_sample(const eertag_dataset* gold, const char* config_json,
                             eertag_dataset** out, char** stats_json_out);

EERTAG_API int eertag_preprocess(const eertag_dataset* dataset,
                                 const char* variant, eertag_dataset** out);

/* ---- training ----------------------------------------------------------
 * config_json keys: scorer ("embed_dim", "window", "hidden_dim",
 * "init_scale", "min_count", "scorer_seed") and trainer ("epochs",
 * "stop_after_epoch", "batch_token_cap", "learning_rate", "schedule",
 * "peak_fraction", "optimizer", "rho", "gamma", "lambda_u", "seed",
 * "checkpoint_dir", "checkpoint_every", "resume": bool).
 * report_json_out carries per-epoch losses and the final entity ratio.
 */
EERTAG_API int eertag_train(const eertag_dataset* train_set,
                            const eertag_dataset* dev_set_or_null,
                            const char* config_json, eertag_model** out,
                            char** report_json_out);

EERTAG_API int eertag_model_save(const eertag_model* model, const char* path);
EERTAG_API int eertag_model_load(const char* path, eertag_model** out);
EERTAG_API void eertag_model_free(eertag_model* model);

/* ---- inference and evaluation ----------------------------------------- */
EERTAG_API int eertag_decode(const eertag_model* model,
                             const eertag_dataset* dataset, double o_bias,
                             eertag_dataset** predictions_out);
EERTAG_API int eertag_evaluate(const eertag_dataset* predictions,
                               const eertag_dataset* gold, char** prf_json_out);
/* grid may be NULL to use 0, 0.25, ..., 5. */
EERTAG_API int eertag_tune_o_bias(const eertag_model* model,
                                  const eertag_dataset* dev, const double* grid,
                                  size_t grid_len, double* best_bias_out,
                                  char** curve_json_out);
/* config_json: {"iterations": int, "confidence": double, "seed": int} */
EERTAG_API int eertag_significance(const eertag_dataset* predictions_a,
                                   const eertag_dataset* predictions_b,
                                   const eertag_dataset* gold,
                                   const char* config_json, char** result_json_out);
EERTAG_API int eertag_entity_ratio(const eertag_model* model,
                                   const eertag_dataset* dataset,
                                   double* ratio_out);

/* ---- synthetic benchmarks ----------------------------------------------
 * Consistency: {"train_sentences", "test_sentences", "seed", "reveal_prob",
 * "entity_ratio_target", "epochs", "baselines": bool}. Sweep additionally
 * takes {"seeds": [..], "settings": [[rho, gamma], ...]}. Results land in
 * out_dir (JSON summary, CSV table) and in report_json_out.
 */
EERTAG_API int eertag_bench_consistency(const char* config_json,
                                        const char* out_dir,
                                        char** report_json_out);
EERTAG_API int eertag_bench_sweep(const char* config_json, const char* out_dir,
                                  char** report_json_out);

#ifdef __cplusplus
}
#endif

#endif /* EERTAG_H */
