#include "rwpattern.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <sstream>
#include <string>

#include "core/dot_export.hpp"
#include "core/errors.hpp"
#include "core/experiments.hpp"
#include "core/extra_trees.hpp"
#include "core/lda.hpp"
#include "core/matrix.hpp"
#include "core/metrics.hpp"
#include "core/ranking.hpp"
#include "core/report.hpp"
#include "core/synth.hpp"
#include "core/tfidf.hpp"

#define RWP_API __attribute__((visibility("default")))

using namespace rwpattern;

struct rwp_matrix {
  TermMatrix value;
};
struct rwp_ranking {
  RankedFeatureList value;
};
struct rwp_model {
  ExtraTreesModel value;
};

namespace {

thread_local std::string g_last_error;

rwp_status status_of(Errc code) {
  switch (code) {
    case Errc::ok: return RWP_OK;
    case Errc::io: return RWP_E_IO;
    case Errc::malformed_report: return RWP_E_MALFORMED_REPORT;
    case Errc::empty_report: return RWP_E_EMPTY_REPORT;
    case Errc::malformed_artifact: return RWP_E_MALFORMED_ARTIFACT;
    case Errc::empty_corpus: return RWP_E_EMPTY_CORPUS;
    case Errc::empty_document: return RWP_E_EMPTY_DOCUMENT;
    case Errc::unknown_document_id: return RWP_E_UNKNOWN_DOCUMENT_ID;
    case Errc::single_class_corpus: return RWP_E_SINGLE_CLASS_CORPUS;
    case Errc::dimension_mismatch: return RWP_E_DIMENSION_MISMATCH;
    case Errc::degenerate_classes: return RWP_E_DEGENERATE_CLASSES;
    case Errc::singular_projection: return RWP_E_SINGULAR_PROJECTION;
    case Errc::all_features_pruned: return RWP_E_ALL_FEATURES_PRUNED;
    case Errc::vocabulary_mismatch: return RWP_E_VOCABULARY_MISMATCH;
    case Errc::index_out_of_range: return RWP_E_INDEX_OUT_OF_RANGE;
    case Errc::empty_evaluation: return RWP_E_EMPTY_EVALUATION;
    case Errc::unknown_fixture: return RWP_E_UNKNOWN_FIXTURE;
    case Errc::invalid_argument: return RWP_E_INVALID_ARGUMENT;
    case Errc::internal: return RWP_E_INTERNAL;
  }
  return RWP_E_INTERNAL;
}

template <typename Fn>
rwp_status guarded(Fn&& fn) {
  try {
    fn();
    return RWP_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RWP_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RWP_E_INTERNAL;
  }
}

rwp_status invalid(const char* message) {
  g_last_error = message;
  return RWP_E_INVALID_ARGUMENT;
}

EtConfig to_core(const rwp_et_config& c) {
  EtConfig out;
  out.n_trees = c.n_trees;
  out.k_candidates = c.k_candidates;
  out.n_min = c.n_min;
  out.max_depth = c.max_depth;
  out.weight_infected = c.weight_infected;
  out.weight_normal = c.weight_normal;
  out.seed = c.seed;
  out.n_threads = c.n_threads;
  return out;
}

std::vector<size_t> read_truth_positions(const char* path) {
  std::vector<size_t> positions;
  std::istringstream in(read_file(path));
  std::string token;
  while (in >> token) {
    try {
      positions.push_back(std::stoull(token));
    } catch (const std::exception&) {
      fail(Errc::malformed_artifact, std::string("bad truth entry in ") + path + ": " + token);
    }
  }
  return positions;
}

std::string document_stem(const char* path) {
  return std::filesystem::path(path).stem().string();
}

void write_predictions_and_metrics(const ExtraTreesModel& model, const TermMatrix& matrix,
                                   const char* predictions_path, const char* metrics_path,
                                   rwp_confusion* counts_out) {
  if (matrix.vocab_hash() != model.vocab_hash)
    fail(Errc::vocabulary_mismatch, "matrix vocabulary does not match the model");
  if (matrix.documents.empty()) fail(Errc::empty_evaluation, "matrix has no documents");

  ConfusionCounts counts;
  std::ostringstream preds;
  preds << "id,label,predicted,p_infected\n";
  for (size_t i = 0; i < matrix.num_docs(); ++i) {
    auto row = matrix.dense_row(i);
    Prediction pred = predict(model, row);
    const Document& doc = matrix.documents[i];
    preds << doc.id << ',' << label_name(doc.label) << ',' << label_name(pred.label) << ','
          << format_double(pred.p_infected) << "\n";
    if (doc.label == Label::infected)
      (pred.label == Label::infected ? counts.tp : counts.fn) += 1;
    else
      (pred.label == Label::infected ? counts.fp : counts.tn) += 1;
  }
  DetectionMetrics m = metrics(counts);
  if (predictions_path) write_file(predictions_path, preds.str());
  if (metrics_path) {
    std::ostringstream out;
    out << "accuracy,precision,recall,f_score\n";
    out << format_double(m.accuracy) << ',' << metric_to_string(m.precision) << ','
        << metric_to_string(m.recall) << ',' << metric_to_string(m.f_score) << "\n";
    write_file(metrics_path, out.str());
  }
  if (counts_out) *counts_out = {counts.tp, counts.fp, counts.fn, counts.tn};
}

}  // namespace

extern "C" {

RWP_API const char* rwp_status_name(rwp_status status) {
  switch (status) {
    case RWP_OK: return "OK";
    case RWP_E_IO: return "IO";
    case RWP_E_MALFORMED_REPORT: return "MALFORMED_REPORT";
    case RWP_E_EMPTY_REPORT: return "EMPTY_REPORT";
    case RWP_E_MALFORMED_ARTIFACT: return "MALFORMED_ARTIFACT";
    case RWP_E_EMPTY_CORPUS: return "EMPTY_CORPUS";
    case RWP_E_EMPTY_DOCUMENT: return "EMPTY_DOCUMENT";
    case RWP_E_UNKNOWN_DOCUMENT_ID: return "UNKNOWN_DOCUMENT_ID";
    case RWP_E_SINGLE_CLASS_CORPUS: return "SINGLE_CLASS_CORPUS";
    case RWP_E_DIMENSION_MISMATCH: return "DIMENSION_MISMATCH";
    case RWP_E_DEGENERATE_CLASSES: return "DEGENERATE_CLASSES";
    case RWP_E_SINGULAR_PROJECTION: return "SINGULAR_PROJECTION";
    case RWP_E_ALL_FEATURES_PRUNED: return "ALL_FEATURES_PRUNED";
    case RWP_E_VOCABULARY_MISMATCH: return "VOCABULARY_MISMATCH";
    case RWP_E_INDEX_OUT_OF_RANGE: return "INDEX_OUT_OF_RANGE";
    case RWP_E_EMPTY_EVALUATION: return "EMPTY_EVALUATION";
    case RWP_E_UNKNOWN_FIXTURE: return "UNKNOWN_FIXTURE";
    case RWP_E_INVALID_ARGUMENT: return "INVALID_ARGUMENT";
    case RWP_E_INTERNAL: return "INTERNAL";
  }
  return "UNKNOWN";
}

RWP_API const char* rwp_last_error(void) { return g_last_error.c_str(); }

RWP_API int rwp_status_is_domain_error(rwp_status status) {
  switch (status) {
    case RWP_OK:
    case RWP_E_IO:
    case RWP_E_INTERNAL:
      return 0;
    default:
      return 1;
  }
}

RWP_API const char* rwp_version(void) { return "1.0.0"; }

RWP_API void rwp_string_free(char* s) { delete[] s; }

RWP_API void rwp_ingest_opts_default(rwp_ingest_opts* opts) {
  if (!opts) return;
  opts->window_width = 0;
  opts->window_stride = 0;
  opts->binary_counts = 0;
  opts->regkey_tail_components = 1;
}

RWP_API rwp_status rwp_matrix_build(const rwp_report_input* inputs, size_t n_inputs,
                                    const rwp_ingest_opts* opts, rwp_matrix** out) {
  if (!inputs || !out) return invalid("inputs and out must be non-null");
  return guarded([&] {
    rwp_ingest_opts defaults;
    rwp_ingest_opts_default(&defaults);
    const rwp_ingest_opts& o = opts ? *opts : defaults;
    if (o.window_width < 0 || o.window_stride < 0)
      fail(Errc::invalid_argument, "window options must be nonnegative");

    IngestOptions ingest;
    if (o.regkey_tail_components > 0) ingest.regkey_tail_components = o.regkey_tail_components;
    MatrixBuilder builder(FeatureOptions{}, o.binary_counts != 0);

    for (size_t i = 0; i < n_inputs; ++i) {
      const rwp_report_input& input = inputs[i];
      if (!input.path) fail(Errc::invalid_argument, "input path must be non-null");
      Label label = input.label == RWP_LABEL_INFECTED ? Label::infected : Label::normal;
      auto events = parse_report_file(input.path, ingest);
      std::string stem = document_stem(input.path);

      if (o.window_width == 0) {
        builder.add_document(stem, label, events);
        continue;
      }
      std::vector<size_t> planted;
      if (input.truth_path) planted = read_truth_positions(input.truth_path);
      size_t width = static_cast<size_t>(o.window_width);
      size_t stride = o.window_stride > 0 ? static_cast<size_t>(o.window_stride) : width;
      size_t w = 0;
      for (auto [start, end] : window_spans(events.size(), width, stride)) {
        bool hit = false;
        for (size_t p : planted)
          if (p >= start && p < end) { hit = true; break; }
        Label window_label = input.truth_path ? (hit ? Label::infected : Label::normal) : label;
        builder.add_document(stem + "#" + std::to_string(w++), window_label,
                             std::span(events).subspan(start, end - start));
      }
    }
    *out = new rwp_matrix{builder.build()};
  });
}

RWP_API rwp_status rwp_matrix_load(const char* path, rwp_matrix** out) {
  if (!path || !out) return invalid("path and out must be non-null");
  return guarded([&] { *out = new rwp_matrix{load_matrix_file(path)}; });
}

RWP_API rwp_status rwp_matrix_save(const rwp_matrix* matrix, const char* path) {
  if (!matrix || !path) return invalid("matrix and path must be non-null");
  return guarded([&] { save_matrix_file(matrix->value, path); });
}

RWP_API size_t rwp_matrix_num_docs(const rwp_matrix* matrix) {
  return matrix ? matrix->value.num_docs() : 0;
}

RWP_API size_t rwp_matrix_vocab_size(const rwp_matrix* matrix) {
  return matrix ? matrix->value.vocab_size() : 0;
}

RWP_API uint64_t rwp_matrix_vocab_hash(const rwp_matrix* matrix) {
  return matrix ? matrix->value.vocab_hash() : 0;
}

RWP_API const char* rwp_matrix_term(const rwp_matrix* matrix, size_t index) {
  if (!matrix || index >= matrix->value.vocab_size()) return nullptr;
  return matrix->value.vocabulary[index].c_str();
}

RWP_API rwp_status rwp_matrix_prune(const rwp_matrix* matrix, const rwp_ranking* scores,
                                    double min_abs_score, int drop_zero_variance,
                                    rwp_matrix** out) {
  if (!matrix || !scores || !out) return invalid("matrix, scores and out must be non-null");
  return guarded([&] {
    *out = new rwp_matrix{
        prune(matrix->value, scores->value, min_abs_score, drop_zero_variance != 0)};
  });
}

RWP_API void rwp_matrix_free(rwp_matrix* matrix) { delete matrix; }

RWP_API rwp_status rwp_rank_tfidf(const rwp_matrix* matrix, const char* const* target_ids,
                                  size_t n_targets, rwp_ranking** out) {
  if (!matrix || !out) return invalid("matrix and out must be non-null");
  if (n_targets > 0 && !target_ids) return invalid("target_ids must be non-null");
  return guarded([&] {
    std::vector<std::string> targets;
    if (n_targets == 0) {
      for (const auto& doc : matrix->value.documents)
        if (doc.label == Label::infected) targets.push_back(doc.id);
      if (targets.empty())
        fail(Errc::single_class_corpus, "matrix has no infected documents to target");
    } else {
      for (size_t i = 0; i < n_targets; ++i) {
        if (!target_ids[i]) fail(Errc::invalid_argument, "target id must be non-null");
        targets.emplace_back(target_ids[i]);
      }
    }
    *out = new rwp_ranking{tfidf_rank(matrix->value, targets)};
  });
}

RWP_API rwp_status rwp_rank_lda(const rwp_matrix* matrix, double ridge_scale, rwp_ranking** out) {
  if (!matrix || !out) return invalid("matrix and out must be non-null");
  return guarded([&] {
    *out = new rwp_ranking{
        lda_rank(fit_lda_matrix(matrix->value, ridge_scale), matrix->value.vocabulary)};
  });
}

RWP_API rwp_status rwp_rank_et(const rwp_model* model, const rwp_matrix* matrix, int by_importance,
                               rwp_ranking** out) {
  if (!model || !matrix || !out) return invalid("model, matrix and out must be non-null");
  return guarded([&] {
    if (matrix->value.vocab_hash() != model->value.vocab_hash)
      fail(Errc::vocabulary_mismatch, "matrix vocabulary does not match model");
    *out = new rwp_ranking{by_importance
                               ? et_importance_rank(model->value, matrix->value.vocabulary)
                               : et_feature_rank(model->value, matrix->value.vocabulary)};
  });
}

RWP_API rwp_status rwp_ranking_save(const rwp_ranking* ranking, const char* path) {
  if (!ranking || !path) return invalid("ranking and path must be non-null");
  return guarded([&] { save_ranking_file(ranking->value, path); });
}

RWP_API rwp_status rwp_ranking_load(const char* path, rwp_ranking** out) {
  if (!path || !out) return invalid("path and out must be non-null");
  return guarded([&] { *out = new rwp_ranking{load_ranking_file(path)}; });
}

RWP_API size_t rwp_ranking_size(const rwp_ranking* ranking) {
  return ranking ? ranking->value.entries.size() : 0;
}

RWP_API rwp_status rwp_ranking_entry(const rwp_ranking* ranking, size_t index,
                                     const char** feature, double* score, long* rank) {
  if (!ranking) return invalid("ranking must be non-null");
  if (index >= ranking->value.entries.size()) {
    g_last_error = "ranking index out of range";
    return RWP_E_INDEX_OUT_OF_RANGE;
  }
  const RankedFeature& e = ranking->value.entries[index];
  if (feature) *feature = e.feature.c_str();
  if (score) *score = e.na ? 0.0 : e.score;
  if (rank) *rank = e.na ? 0 : e.rank;
  return RWP_OK;
}

RWP_API void rwp_ranking_free(rwp_ranking* ranking) { delete ranking; }

RWP_API void rwp_et_config_default(rwp_et_config* config) {
  if (!config) return;
  EtConfig defaults;
  config->n_trees = defaults.n_trees;
  config->k_candidates = defaults.k_candidates;
  config->n_min = defaults.n_min;
  config->max_depth = defaults.max_depth;
  config->weight_infected = defaults.weight_infected;
  config->weight_normal = defaults.weight_normal;
  config->seed = 42;
  config->n_threads = defaults.n_threads;
}

RWP_API rwp_status rwp_et_fit(const rwp_matrix* matrix, const rwp_et_config* config,
                              rwp_model** out) {
  if (!matrix || !config || !out) return invalid("matrix, config and out must be non-null");
  return guarded([&] { *out = new rwp_model{fit_et(matrix->value, to_core(*config))}; });
}

RWP_API rwp_status rwp_model_save(const rwp_model* model, const char* path) {
  if (!model || !path) return invalid("model and path must be non-null");
  return guarded([&] { save_model_file(model->value, path); });
}

RWP_API rwp_status rwp_model_load(const char* path, rwp_model** out) {
  if (!path || !out) return invalid("path and out must be non-null");
  return guarded([&] { *out = new rwp_model{load_model_file(path)}; });
}

RWP_API uint64_t rwp_model_vocab_hash(const rwp_model* model) {
  return model ? model->value.vocab_hash : 0;
}

RWP_API size_t rwp_model_num_trees(const rwp_model* model) {
  return model ? model->value.trees.size() : 0;
}

RWP_API rwp_status rwp_model_predict(const rwp_model* model, const double* x, size_t dimension,
                                     int* label, double* p_infected) {
  if (!model || !x) return invalid("model and x must be non-null");
  return guarded([&] {
    Prediction pred = predict(model->value, std::span<const double>(x, dimension));
    if (label) *label = pred.label == Label::infected ? RWP_LABEL_INFECTED : RWP_LABEL_NORMAL;
    if (p_infected) *p_infected = pred.p_infected;
  });
}

RWP_API rwp_status rwp_model_detect(const rwp_model* model, const rwp_matrix* matrix,
                                    const char* predictions_csv_path, const char* metrics_csv_path,
                                    rwp_confusion* counts_out) {
  if (!model || !matrix) return invalid("model and matrix must be non-null");
  return guarded([&] {
    write_predictions_and_metrics(model->value, matrix->value, predictions_csv_path,
                                  metrics_csv_path, counts_out);
  });
}

RWP_API void rwp_model_free(rwp_model* model) { delete model; }

RWP_API void rwp_graph_style_default(rwp_graph_style* style) {
  if (!style) return;
  GraphStyle defaults;
  style->max_levels = defaults.max_levels;
  style->malicious_color = nullptr;
  style->normal_color = nullptr;
  style->annotate_class_counts = defaults.annotate_class_counts ? 1 : 0;
  style->annotate_impurity = defaults.annotate_impurity ? 1 : 0;
  style->annotate_correlation = defaults.annotate_correlation ? 1 : 0;
}

RWP_API rwp_status rwp_model_to_dot(const rwp_model* model, size_t tree_index,
                                    const rwp_matrix* matrix, const rwp_graph_style* style,
                                    char** dot_text) {
  if (!model || !matrix || !dot_text) return invalid("model, matrix and dot_text must be non-null");
  return guarded([&] {
    GraphStyle gs;
    if (style) {
      gs.max_levels = style->max_levels;
      if (style->malicious_color) gs.malicious_color = style->malicious_color;
      if (style->normal_color) gs.normal_color = style->normal_color;
      gs.annotate_class_counts = style->annotate_class_counts != 0;
      gs.annotate_impurity = style->annotate_impurity != 0;
      gs.annotate_correlation = style->annotate_correlation != 0;
    }
    std::string text = to_dot(model->value, tree_index, matrix->value, gs);
    char* buffer = new char[text.size() + 1];
    std::memcpy(buffer, text.c_str(), text.size() + 1);
    *dot_text = buffer;
  });
}

RWP_API rwp_status rwp_validate_dot(const char* text) {
  if (!text) return invalid("text must be non-null");
  std::string error;
  if (validate_dot(text, &error)) return RWP_OK;
  g_last_error = error;
  return RWP_E_INVALID_ARGUMENT;
}

RWP_API size_t rwp_fixture_count(void) { return builtin_fixtures().size(); }

RWP_API const char* rwp_fixture_name(size_t index) {
  const auto& fixtures = builtin_fixtures();
  if (index >= fixtures.size()) return nullptr;
  return fixtures[index].name.c_str();
}

RWP_API void rwp_synth_opts_default(rwp_synth_opts* opts) {
  if (!opts) return;
  SynthOptions defaults;
  opts->seed = defaults.seed;
  opts->n_normal = defaults.n_normal;
  opts->events_per_doc = defaults.events_per_doc;
  opts->n_infected = defaults.n_infected;
  opts->injection_rate = defaults.injection_rate;
  opts->confuser_fraction = defaults.confuser_fraction;
  opts->stream_format = defaults.stream_format ? 1 : 0;
}

RWP_API rwp_status rwp_synth_write_corpus(const char* fixture, const rwp_synth_opts* opts,
                                          const char* out_dir) {
  if (!out_dir) return invalid("out_dir must be non-null");
  return guarded([&] {
    const PatternSpec* pattern = nullptr;
    if (fixture && std::string_view(fixture) != "none") {
      pattern = find_fixture(fixture);
      if (!pattern) fail(Errc::unknown_fixture, std::string("unknown fixture: ") + fixture);
    }
    SynthOptions core;
    if (opts) {
      core.seed = opts->seed;
      core.n_normal = opts->n_normal;
      core.events_per_doc = opts->events_per_doc;
      core.n_infected = opts->n_infected;
      core.injection_rate = opts->injection_rate;
      core.confuser_fraction = opts->confuser_fraction;
      core.stream_format = opts->stream_format != 0;
    }
    write_corpus(out_dir, pattern, core);
  });
}

RWP_API void rwp_experiment_opts_default(rwp_experiment_opts* opts) {
  if (!opts) return;
  ExperimentConfig defaults;
  opts->seed = defaults.seed;
  opts->n_normal = defaults.n_normal;
  opts->events_per_doc = defaults.events_per_doc;
  opts->injection_rate = defaults.injection_rate;
  opts->top_k = defaults.top_k;
  opts->ridge_scale = defaults.ridge_scale;
  opts->doc_prune_min_score = defaults.doc_prune_min_score;
  opts->window_prune_min_score = defaults.window_prune_min_score;
  opts->window_width = defaults.window_width;
  opts->window_stride = defaults.window_stride;
  opts->detection_infected_streams = defaults.detection_infected_streams;
  opts->train_fraction = defaults.train_fraction;
  rwp_et_config_default(&opts->et);
}

RWP_API rwp_status rwp_run_experiments(const char* fixture, const rwp_experiment_opts* opts,
                                       const char* out_dir) {
  if (!fixture || !out_dir) return invalid("fixture and out_dir must be non-null");
  return guarded([&] {
    ExperimentConfig cfg;
    if (opts) {
      cfg.seed = opts->seed;
      cfg.n_normal = opts->n_normal;
      cfg.events_per_doc = opts->events_per_doc;
      cfg.injection_rate = opts->injection_rate;
      cfg.top_k = opts->top_k;
      cfg.ridge_scale = opts->ridge_scale;
      cfg.doc_prune_min_score = opts->doc_prune_min_score;
      cfg.window_prune_min_score = opts->window_prune_min_score;
      cfg.window_width = opts->window_width;
      cfg.window_stride = opts->window_stride;
      cfg.detection_infected_streams = opts->detection_infected_streams;
      cfg.train_fraction = opts->train_fraction;
      cfg.et = to_core(opts->et);
    }
    write_experiment_bundle(run_experiments(fixture, cfg), out_dir);
  });
}

}  // extern "C"
