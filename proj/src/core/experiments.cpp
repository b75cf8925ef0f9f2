#include "core/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "core/errors.hpp"
#include "core/lda.hpp"
#include "core/rng.hpp"
#include "core/tfidf.hpp"

namespace rwpattern {

namespace {

constexpr uint64_t kEtStream = 0xE7;
constexpr uint64_t kSplitStream = 0x5717;

std::string doc_id(const char* prefix, size_t i) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_%03zu", prefix, i);
  return buf;
}

struct DocPipelineOutput {
  RankedFeatureList tfidf, lda, et;
};

// Whole-report corpus: n_normal ambient documents plus the fixture's infected
// stream (always the same stream, so corpus growth varies only the normals).
TermMatrix build_doc_corpus(const PatternSpec& fixture, const ExperimentConfig& cfg,
                            size_t n_normal) {
  MatrixBuilder builder;
  std::vector<EventRecord> canon;
  for (size_t i = 0; i < n_normal; ++i) {
    auto raw = gen_normal_stream(normal_doc_seed(cfg.seed, i), cfg.events_per_doc);
    canon.clear();
    for (const auto& ev : raw) canon.push_back(canonicalize_raw(ev));
    builder.add_document(doc_id("normal", i), Label::normal, canon);
  }
  uint64_t stream_seed = infected_stream_seed(cfg.seed, 0);
  auto base = gen_normal_stream(stream_seed, cfg.events_per_doc, /*common_only=*/true);
  auto infected =
      gen_infected(derive_seed(stream_seed, 1), std::move(base), fixture, cfg.injection_rate);
  canon.clear();
  for (const auto& ev : infected.events) canon.push_back(canonicalize_raw(ev));
  builder.add_document(doc_id("infected", 0), Label::infected, canon);
  return builder.build();
}

std::vector<std::string> infected_ids(const TermMatrix& matrix) {
  std::vector<std::string> ids;
  for (const auto& d : matrix.documents)
    if (d.label == Label::infected) ids.push_back(d.id);
  return ids;
}

DocPipelineOutput rank_three_ways(const TermMatrix& matrix, const ExperimentConfig& cfg) {
  DocPipelineOutput out;
  out.tfidf = tfidf_rank(matrix, infected_ids(matrix));
  out.lda = lda_rank(fit_lda_matrix(matrix, cfg.ridge_scale), matrix.vocabulary);

  TermMatrix pruned = prune(matrix, out.tfidf, cfg.doc_prune_min_score, /*drop_zero_variance=*/true);
  EtConfig et = cfg.et;
  et.seed = derive_seed(cfg.seed, kEtStream);
  auto model = fit_et(pruned, et);
  out.et = et_feature_rank(model, pruned.vocabulary);
  return out;
}

std::string rank_or_na(const RankedFeatureList& list, const std::string& feature) {
  const RankedFeature* e = list.find(feature);
  if (!e || e->na) return "NA";
  return std::to_string(e->rank);
}

}  // namespace

std::pair<std::vector<size_t>, std::vector<size_t>> stratified_split(const TermMatrix& matrix,
                                                                     double train_fraction,
                                                                     uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(Errc::invalid_argument, "train_fraction must be in (0, 1)");

  std::vector<size_t> train, test;
  Rand rng(seed);
  for (Label label : {Label::normal, Label::infected}) {
    std::vector<size_t> rows;
    for (size_t i = 0; i < matrix.num_docs(); ++i)
      if (matrix.documents[i].label == label) rows.push_back(i);
    if (rows.empty()) continue;
    rng.partial_shuffle(rows, rows.size());
    size_t n_train = static_cast<size_t>(
        std::llround(train_fraction * static_cast<double>(rows.size())));
    if (rows.size() >= 2) n_train = std::clamp<size_t>(n_train, 1, rows.size() - 1);
    else n_train = 1;
    train.insert(train.end(), rows.begin(), rows.begin() + static_cast<long>(n_train));
    test.insert(test.end(), rows.begin() + static_cast<long>(n_train), rows.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

ExperimentResult run_experiments(const std::string& fixture_name, const ExperimentConfig& cfg) {
  const PatternSpec* fixture = find_fixture(fixture_name);
  if (!fixture) fail(Errc::unknown_fixture, "unknown fixture: " + fixture_name);

  ExperimentResult result;
  result.fixture = fixture_name;

  // --- Experiment 1: rankings on the baseline corpus -----------------------
  TermMatrix base_matrix = build_doc_corpus(*fixture, cfg, cfg.n_normal);
  DocPipelineOutput base = rank_three_ways(base_matrix, cfg);
  result.e1_tfidf = base.tfidf;
  result.e1_lda = base.lda;
  result.e1_et = base.et;
  for (const auto& key : planted_feature_keys(*fixture))
    result.e1_pattern_table.push_back({key, rank_or_na(base.tfidf, key), rank_or_na(base.lda, key),
                                       rank_or_na(base.et, key)});

  // --- Experiment 2: +30% / +60% additional normal documents ---------------
  for (double growth : {0.30, 0.60}) {
    size_t n = cfg.n_normal + static_cast<size_t>(std::llround(
                                  growth * static_cast<double>(cfg.n_normal)));
    TermMatrix grown = build_doc_corpus(*fixture, cfg, n);
    DocPipelineOutput aug = rank_three_ways(grown, cfg);
    std::string case_name = growth == 0.30 ? "+30%" : "+60%";
    result.e2.push_back({RankMethod::tfidf, case_name,
                         rank_stability(base.tfidf, aug.tfidf, cfg.top_k)});
    result.e2.push_back({RankMethod::lda, case_name, rank_stability(base.lda, aug.lda, cfg.top_k)});
    result.e2.push_back({RankMethod::et, case_name, rank_stability(base.et, aug.et, cfg.top_k)});
  }

  // --- Experiment 3: windowed early detection on a held-out split ----------
  MatrixBuilder windows;
  std::vector<EventRecord> canon;
  auto add_windows = [&](const std::string& id_prefix, const std::vector<EventRecord>& events,
                         const std::vector<size_t>& planted) {
    size_t w = 0;
    for (auto [start, end] : window_spans(events.size(), cfg.window_width, cfg.window_stride)) {
      bool hit = std::any_of(planted.begin(), planted.end(),
                             [&](size_t p) { return p >= start && p < end; });
      windows.add_document(id_prefix + "#" + std::to_string(w++),
                           hit ? Label::infected : Label::normal,
                           std::span(events).subspan(start, end - start));
    }
  };

  for (size_t i = 0; i < cfg.n_normal; ++i) {
    auto raw = gen_normal_stream(normal_doc_seed(cfg.seed, i), cfg.events_per_doc);
    canon.clear();
    for (const auto& ev : raw) canon.push_back(canonicalize_raw(ev));
    add_windows(doc_id("normal", i), canon, {});
  }
  for (size_t j = 0; j < cfg.detection_infected_streams; ++j) {
    uint64_t stream_seed = infected_stream_seed(cfg.seed, j);
    auto ambient = gen_normal_stream(stream_seed, cfg.events_per_doc, /*common_only=*/true);
    auto infected =
        gen_infected(derive_seed(stream_seed, 1), std::move(ambient), *fixture, cfg.injection_rate);
    canon.clear();
    for (const auto& ev : infected.events) canon.push_back(canonicalize_raw(ev));
    add_windows(doc_id("infected", j), canon, infected.planted_positions);
  }

  TermMatrix window_matrix = windows.build();
  auto [train_rows, test_rows] =
      stratified_split(window_matrix, cfg.train_fraction, derive_seed(cfg.seed, kSplitStream));
  if (test_rows.empty()) fail(Errc::empty_evaluation, "held-out split is empty");

  // Restrict to the vocabulary observed in training windows, then prune by
  // scores computed on the training side only.
  std::vector<char> seen_in_train(window_matrix.vocab_size(), 0);
  for (size_t row : train_rows)
    for (const auto& [term, count] : window_matrix.documents[row].counts)
      if (count > 0) seen_in_train[static_cast<size_t>(term)] = 1;
  TermMatrix all_docs = restrict_vocabulary(window_matrix, seen_in_train);

  TermMatrix train_matrix = submatrix(all_docs, train_rows);
  RankedFeatureList train_scores = tfidf_rank(train_matrix, infected_ids(train_matrix));
  TermMatrix pruned_train =
      prune(train_matrix, train_scores, cfg.window_prune_min_score, /*drop_zero_variance=*/true);

  std::unordered_set<std::string_view> kept(pruned_train.vocabulary.begin(),
                                            pruned_train.vocabulary.end());
  std::vector<char> keep_mask(all_docs.vocab_size(), 0);
  for (size_t i = 0; i < all_docs.vocab_size(); ++i)
    keep_mask[i] = kept.count(all_docs.vocabulary[i]) ? 1 : 0;
  TermMatrix pruned_all = restrict_vocabulary(all_docs, keep_mask);
  TermMatrix pruned_test = submatrix(pruned_all, test_rows);

  EtConfig et = cfg.et;
  et.seed = derive_seed(cfg.seed, kEtStream + 1);
  auto model = fit_et(pruned_train, et);

  for (size_t i = 0; i < pruned_test.num_docs(); ++i) {
    auto row = pruned_test.dense_row(i);
    Prediction pred = predict(model, row);
    const Document& doc = pruned_test.documents[i];
    result.e3_predictions.push_back({doc.id, doc.label, pred.label, pred.p_infected});
    if (doc.label == Label::infected)
      (pred.label == Label::infected ? result.e3_counts.tp : result.e3_counts.fn) += 1;
    else
      (pred.label == Label::infected ? result.e3_counts.fp : result.e3_counts.tn) += 1;
  }
  result.e3_metrics = metrics(result.e3_counts);
  return result;
}

void write_experiment_bundle(const ExperimentResult& result, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(Errc::io, "cannot create directory " + out_dir + ": " + ec.message());

  save_ranking_file(result.e1_tfidf, out_dir + "/e1_rank_tfidf.csv");
  save_ranking_file(result.e1_lda, out_dir + "/e1_rank_lda.csv");
  save_ranking_file(result.e1_et, out_dir + "/e1_rank_et.csv");

  std::ostringstream table;
  table << "feature,tfidf_rank,lda_rank,et_rank\n";
  for (const auto& row : result.e1_pattern_table)
    table << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << "\n";
  write_file(out_dir + "/e1_pattern_table.csv", table.str());

  std::ostringstream stability;
  stability << "method,case,top_k_overlap,rank_agreement,changed_features\n";
  for (const auto& entry : result.e2) {
    stability << rank_method_name(entry.method) << ',' << entry.case_name << ','
              << format_double(entry.report.top_k_overlap) << ','
              << format_double(entry.report.rank_agreement) << ',';
    bool first = true;
    for (const auto& change : entry.report.changed) {
      if (!first) stability << ';';
      stability << change.feature << ':'
                << (change.base_rank ? std::to_string(change.base_rank) : "NA") << "->"
                << (change.aug_rank ? std::to_string(change.aug_rank) : "NA");
      first = false;
    }
    stability << "\n";
  }
  write_file(out_dir + "/e2_stability.csv", stability.str());

  std::ostringstream m;
  m << "ransomware,accuracy,precision,recall,f_score\n";
  m << result.fixture << ',' << format_double(result.e3_metrics.accuracy) << ','
    << metric_to_string(result.e3_metrics.precision) << ','
    << metric_to_string(result.e3_metrics.recall) << ','
    << metric_to_string(result.e3_metrics.f_score) << "\n";
  write_file(out_dir + "/e3_metrics.csv", m.str());

  std::ostringstream preds;
  preds << "id,label,predicted,p_infected\n";
  for (const auto& p : result.e3_predictions)
    preds << p.id << ',' << label_name(p.truth) << ',' << label_name(p.predicted) << ','
          << format_double(p.p_infected) << "\n";
  write_file(out_dir + "/e3_predictions.csv", preds.str());
}

}  // namespace rwpattern
