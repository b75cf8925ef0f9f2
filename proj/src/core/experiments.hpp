#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/extra_trees.hpp"
#include "core/matrix.hpp"
#include "core/metrics.hpp"
#include "core/ranking.hpp"
#include "core/synth.hpp"

namespace rwpattern {

struct ExperimentConfig {
  uint64_t seed = 42;
  size_t n_normal = 50;
  size_t events_per_doc = 200;
  double injection_rate = 20.0;
  int top_k = 10;
  double ridge_scale = 1e-6;

  // Whole-report pipeline (rankings): low-influence features are discarded
  // before the forest is grown, shrinking its search space.
  double doc_prune_min_score = 0.035;

  // Detection pipeline (event windows).
  double window_prune_min_score = 0.025;
  size_t window_width = 50;
  size_t window_stride = 25;
  size_t detection_infected_streams = 3;
  double train_fraction = 0.7;

  EtConfig et;  // seed field is overridden with a stream derived from `seed`
};

struct StabilityCase {
  RankMethod method;
  std::string case_name;  // "+30%" / "+60%"
  StabilityReport report;
};

struct WindowPrediction {
  std::string id;
  Label truth = Label::normal;
  Label predicted = Label::normal;
  double p_infected = 0.0;
};

struct ExperimentResult {
  std::string fixture;

  // Experiment 1: the three rankings on the baseline corpus plus a
  // side-by-side rank table for the fixture's planted features
  // (feature, tfidf rank, lda rank, et rank; "NA" where unranked).
  RankedFeatureList e1_tfidf, e1_lda, e1_et;
  std::vector<std::array<std::string, 4>> e1_pattern_table;

  // Experiment 2: ranking stability with +30% / +60% additional normal logs.
  std::vector<StabilityCase> e2;

  // Experiment 3: windowed early-detection metrics on a held-out split.
  ConfusionCounts e3_counts;
  DetectionMetrics e3_metrics;
  std::vector<WindowPrediction> e3_predictions;
};

/// Deterministic stratified split by document label; returns (train, test)
/// row indices, each ascending. Every class with at least two documents
/// contributes at least one document to each side.
std::pair<std::vector<size_t>, std::vector<size_t>> stratified_split(const TermMatrix& matrix,
                                                                     double train_fraction,
                                                                     uint64_t seed);

ExperimentResult run_experiments(const std::string& fixture_name, const ExperimentConfig& config);

/// Write the bundle: e1_rank_{tfidf,lda,et}.csv, e1_pattern_table.csv,
/// e2_stability.csv, e3_metrics.csv, e3_predictions.csv.
void write_experiment_bundle(const ExperimentResult& result, const std::string& out_dir);

}  // namespace rwpattern
