#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/ranking.hpp"

namespace rwpattern {

/// "infected" is the positive class.
struct ConfusionCounts {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;

  int64_t total() const { return tp + fp + fn + tn; }
};

struct DetectionMetrics {
  double accuracy = 0.0;
  std::optional<double> precision;  // nullopt when tp + fp == 0
  std::optional<double> recall;     // nullopt when tp + fn == 0
  std::optional<double> f_score;    // nullopt when either part is; 0 when P + R == 0
};

/// 2PR / (P + R); 0 when the sum is zero; NA when either input is NA.
std::optional<double> f_score(std::optional<double> precision, std::optional<double> recall);

DetectionMetrics metrics(const ConfusionCounts& counts);  // EMPTY_EVALUATION on total == 0

std::string metric_to_string(const std::optional<double>& value);  // "NA" when unset

struct RankChange {
  std::string feature;
  int base_rank = 0;  // 0 = NA/absent
  int aug_rank = 0;
};

struct StabilityReport {
  double top_k_overlap = 0.0;    // |top-k(base) intersect top-k(aug)| / k_eff
  double rank_agreement = 0.0;   // fraction of base top-k holding the same dense rank in aug
  std::vector<RankChange> changed;
};

/// Compare two rankings from the same method. Top-k sets are the first k
/// non-NA entries in display order; k shrinks to the shorter list when needed.
StabilityReport rank_stability(const RankedFeatureList& base, const RankedFeatureList& augmented,
                               int k);

}  // namespace rwpattern
