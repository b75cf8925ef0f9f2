#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/ranking.hpp"

namespace rwpattern {

struct EtConfig {
  int n_trees = 100;
  /// Attributes drawn per split: K_SQRT picks ceil(sqrt(m)), K_ALL every
  /// non-constant attribute, a positive value that many.
  static constexpr int K_SQRT = 0;
  static constexpr int K_ALL = -1;
  int k_candidates = K_SQRT;
  int n_min = 2;      // minimum samples to split
  int max_depth = 0;  // 0 = unlimited; root has depth 1
  double weight_infected = 10.0;
  double weight_normal = 1.0;
  uint64_t seed = 0;  // mandatory; per-tree streams derive from (seed, tree index)
  int n_threads = 1;  // 0 = hardware concurrency; result is schedule-independent
};

struct TreeNode {
  bool is_leaf = true;
  int32_t feature = -1;
  double threshold = 0.0;
  int depth = 1;  // root = 1
  double weight_normal = 0.0;
  double weight_infected = 0.0;
  double impurity = 0.0;  // weighted Gini
  std::unique_ptr<TreeNode> left, right;
};

/// One candidate split examined at a node, for audit/oracle purposes.
struct SplitCandidate {
  int32_t feature = -1;
  double threshold = 0.0;
  double decrease = 0.0;  // weighted Gini decrease
};

struct NodeAudit {
  size_t tree_index = 0;
  std::vector<size_t> sample_indices;     // rows of the training matrix at this node
  std::vector<SplitCandidate> candidates; // in draw order
  int chosen = -1;                        // index into candidates; -1 = node became a leaf
};

/// Observing a fit forces single-threaded training; audits arrive in
/// deterministic preorder per tree, trees ascending.
using FitObserver = std::function<void(const NodeAudit&)>;

struct ExtraTreesModel {
  EtConfig config;
  size_t vocab_size = 0;
  uint64_t vocab_hash = 0;
  std::vector<std::unique_ptr<TreeNode>> trees;

  /// Minimum depth at which each feature appears as a split, over all trees.
  /// Features splitting no tree are absent.
  std::map<int32_t, int> min_depth_per_feature() const;

  /// Total weighted impurity decrease credited to each feature, averaged over
  /// trees (mean decrease impurity).
  std::vector<double> impurity_importance() const;
};

struct Prediction {
  Label label = Label::normal;
  double p_normal = 0.0;
  double p_infected = 0.0;
};

/// Grow the forest on the full sample (no bootstrapping). At each node at
/// least n_min samples and impurity > 0 are required; k distinct non-constant
/// attributes are drawn, one uniform cut in (min, max) each, and the candidate
/// with the largest weighted Gini decrease wins. A node with no positive
/// decrease becomes a leaf. Class weights multiply sample counts in impurity
/// and in leaf votes.
ExtraTreesModel fit_et(const TermMatrix& matrix, const EtConfig& config,
                       const FitObserver& observer = nullptr);

/// Route x through every tree, average the normalized leaf distributions,
/// argmax with ties toward infected.
Prediction predict(const ExtraTreesModel& model, std::span<const double> x);

/// Dense ranks by ascending minimal split depth (depth 1 -> rank 1); features
/// used in no tree get the NA rank.
RankedFeatureList et_feature_rank(const ExtraTreesModel& model,
                                  const std::vector<std::string>& vocabulary);

/// Alternative ordering by mean impurity decrease, for comparison with the
/// depth-based ranks. Features never split still get NA.
RankedFeatureList et_importance_rank(const ExtraTreesModel& model,
                                     const std::vector<std::string>& vocabulary);

void save_model(const ExtraTreesModel& model, std::ostream& out);
void save_model_file(const ExtraTreesModel& model, const std::string& path);
ExtraTreesModel load_model(std::istream& in);
ExtraTreesModel load_model_file(const std::string& path);

}  // namespace rwpattern
