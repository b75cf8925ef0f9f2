/*
 * rwpattern — behavioral pattern extraction and early detection from host
 * activity logs.
 *
 * C API over the C++ core. All functions returning rwp_status set a
 * thread-local error message retrievable with rwp_last_error(). Objects are
 * opaque handles owned by the caller and released with the matching *_free().
 */
#ifndef RWPATTERN_H
#define RWPATTERN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rwp_status {
  RWP_OK = 0,
  RWP_E_IO,
  RWP_E_MALFORMED_REPORT,
  RWP_E_EMPTY_REPORT,
  RWP_E_MALFORMED_ARTIFACT,
  RWP_E_EMPTY_CORPUS,
  RWP_E_EMPTY_DOCUMENT,
  RWP_E_UNKNOWN_DOCUMENT_ID,
  RWP_E_SINGLE_CLASS_CORPUS,
  RWP_E_DIMENSION_MISMATCH,
  RWP_E_DEGENERATE_CLASSES,
  RWP_E_SINGULAR_PROJECTION,
  RWP_E_ALL_FEATURES_PRUNED,
  RWP_E_VOCABULARY_MISMATCH,
  RWP_E_INDEX_OUT_OF_RANGE,
  RWP_E_EMPTY_EVALUATION,
  RWP_E_UNKNOWN_FIXTURE,
  RWP_E_INVALID_ARGUMENT,
  RWP_E_INTERNAL
} rwp_status;

const char* rwp_status_name(rwp_status status);

/* Last error message for the current thread; valid until the next failing
 * call on the same thread. */
const char* rwp_last_error(void);

/* 1 for domain errors (bad input data/arguments), 0 for I/O and internal
 * failures. Useful for mapping to process exit codes. */
int rwp_status_is_domain_error(rwp_status status);

const char* rwp_version(void);

void rwp_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Term matrix                                                          */

typedef struct rwp_matrix rwp_matrix;
typedef struct rwp_ranking rwp_ranking;
typedef struct rwp_model rwp_model;

#define RWP_LABEL_NORMAL 0
#define RWP_LABEL_INFECTED 1

typedef struct rwp_report_input {
  const char* path;       /* JSON report or line-format event stream */
  int label;              /* RWP_LABEL_* */
  const char* truth_path; /* optional: planted event positions, one per line */
} rwp_report_input;

typedef struct rwp_ingest_opts {
  int window_width;           /* 0 = one document per report */
  int window_stride;          /* 0 = window_width */
  int binary_counts;          /* nonzero: presence instead of counts */
  int regkey_tail_components; /* 0 = default (1) */
} rwp_ingest_opts;

void rwp_ingest_opts_default(rwp_ingest_opts* opts);

/* Parse reports, featurize and assemble the document-term matrix. In window
 * mode a report with a truth file gets per-window labels (a window is
 * infected iff it contains a planted event position). */
rwp_status rwp_matrix_build(const rwp_report_input* inputs, size_t n_inputs,
                            const rwp_ingest_opts* opts, rwp_matrix** out);

rwp_status rwp_matrix_load(const char* path, rwp_matrix** out);
rwp_status rwp_matrix_save(const rwp_matrix* matrix, const char* path);
size_t rwp_matrix_num_docs(const rwp_matrix* matrix);
size_t rwp_matrix_vocab_size(const rwp_matrix* matrix);
uint64_t rwp_matrix_vocab_hash(const rwp_matrix* matrix);
const char* rwp_matrix_term(const rwp_matrix* matrix, size_t index); /* NULL when out of range */

/* Keep features with |score| >= min_abs_score (and, when asked, drop columns
 * constant across all documents). */
rwp_status rwp_matrix_prune(const rwp_matrix* matrix, const rwp_ranking* scores,
                            double min_abs_score, int drop_zero_variance, rwp_matrix** out);
void rwp_matrix_free(rwp_matrix* matrix);

/* ------------------------------------------------------------------ */
/* Rankings                                                             */

/* n_targets == 0 ranks against the concatenation of every infected document. */
rwp_status rwp_rank_tfidf(const rwp_matrix* matrix, const char* const* target_ids,
                          size_t n_targets, rwp_ranking** out);
rwp_status rwp_rank_lda(const rwp_matrix* matrix, double ridge_scale, rwp_ranking** out);

/* Depth-based forest ranking (by_importance == 0) or mean impurity-decrease
 * ordering (by_importance != 0). The matrix supplies the vocabulary and must
 * match the model's vocabulary hash. */
rwp_status rwp_rank_et(const rwp_model* model, const rwp_matrix* matrix, int by_importance,
                       rwp_ranking** out);

rwp_status rwp_ranking_save(const rwp_ranking* ranking, const char* path);
rwp_status rwp_ranking_load(const char* path, rwp_ranking** out);
size_t rwp_ranking_size(const rwp_ranking* ranking);

/* rank receives 0 for NA entries. Returned feature pointer is owned by the
 * ranking. */
rwp_status rwp_ranking_entry(const rwp_ranking* ranking, size_t index, const char** feature,
                             double* score, long* rank);
void rwp_ranking_free(rwp_ranking* ranking);

/* ------------------------------------------------------------------ */
/* Extremely randomized trees                                           */

#define RWP_K_SQRT 0
#define RWP_K_ALL (-1)

typedef struct rwp_et_config {
  int n_trees;
  int k_candidates; /* RWP_K_SQRT, RWP_K_ALL or a positive count */
  int n_min;
  int max_depth; /* 0 = unlimited */
  double weight_infected;
  double weight_normal;
  uint64_t seed;
  int n_threads; /* 0 = hardware concurrency; result independent of schedule */
} rwp_et_config;

void rwp_et_config_default(rwp_et_config* config);

rwp_status rwp_et_fit(const rwp_matrix* matrix, const rwp_et_config* config, rwp_model** out);
rwp_status rwp_model_save(const rwp_model* model, const char* path);
rwp_status rwp_model_load(const char* path, rwp_model** out);
uint64_t rwp_model_vocab_hash(const rwp_model* model);
size_t rwp_model_num_trees(const rwp_model* model);

/* x has matrix vocabulary order; label receives RWP_LABEL_*. */
rwp_status rwp_model_predict(const rwp_model* model, const double* x, size_t dimension,
                             int* label, double* p_infected);

typedef struct rwp_confusion {
  long long tp, fp, fn, tn;
} rwp_confusion;

/* Classify every document of the matrix (vocabulary hashes must match) and
 * optionally write predictions/metrics CSV artifacts. */
rwp_status rwp_model_detect(const rwp_model* model, const rwp_matrix* matrix,
                            const char* predictions_csv_path, const char* metrics_csv_path,
                            rwp_confusion* counts_out);
void rwp_model_free(rwp_model* model);

/* ------------------------------------------------------------------ */
/* Forensic graphs                                                      */

typedef struct rwp_graph_style {
  int max_levels;
  const char* malicious_color; /* NULL = "blue" */
  const char* normal_color;    /* NULL = "brown" */
  int annotate_class_counts;
  int annotate_impurity;
  int annotate_correlation;
} rwp_graph_style;

void rwp_graph_style_default(rwp_graph_style* style);

/* Render one tree as DOT text (caller frees with rwp_string_free). */
rwp_status rwp_model_to_dot(const rwp_model* model, size_t tree_index, const rwp_matrix* matrix,
                            const rwp_graph_style* style, char** dot_text);

/* RWP_OK when text is a well-formed digraph; otherwise
 * RWP_E_INVALID_ARGUMENT with the parse failure in rwp_last_error(). */
rwp_status rwp_validate_dot(const char* text);

/* ------------------------------------------------------------------ */
/* Synthetic corpora and the experiment harness                         */

size_t rwp_fixture_count(void);
const char* rwp_fixture_name(size_t index); /* NULL when out of range */

typedef struct rwp_synth_opts {
  uint64_t seed;
  size_t n_normal;
  size_t events_per_doc;
  size_t n_infected;
  double injection_rate;    /* planted events per 100 ambient events */
  double confuser_fraction; /* fraction of normal docs receiving one planted event */
  int stream_format;        /* nonzero: line format instead of JSON */
} rwp_synth_opts;

void rwp_synth_opts_default(rwp_synth_opts* opts);

/* fixture == NULL or "none" generates normal documents only. */
rwp_status rwp_synth_write_corpus(const char* fixture, const rwp_synth_opts* opts,
                                  const char* out_dir);

typedef struct rwp_experiment_opts {
  uint64_t seed;
  size_t n_normal;
  size_t events_per_doc;
  double injection_rate;
  int top_k;
  double ridge_scale;
  double doc_prune_min_score;
  double window_prune_min_score;
  size_t window_width;
  size_t window_stride;
  size_t detection_infected_streams;
  double train_fraction;
  rwp_et_config et;
} rwp_experiment_opts;

void rwp_experiment_opts_default(rwp_experiment_opts* opts);

rwp_status rwp_run_experiments(const char* fixture, const rwp_experiment_opts* opts,
                               const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RWPATTERN_H */
