#include "core/metrics.hpp"

#include <algorithm>
#include <unordered_map>

#include "core/errors.hpp"

namespace rwpattern {

std::optional<double> f_score(std::optional<double> precision, std::optional<double> recall) {
  if (!precision || !recall) return std::nullopt;
  double sum = *precision + *recall;
  if (sum <= 0.0) return 0.0;
  return 2.0 * *precision * *recall / sum;
}

DetectionMetrics metrics(const ConfusionCounts& c) {
  int64_t total = c.total();
  if (total <= 0) fail(Errc::empty_evaluation, "no evaluated instances");
  if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0)
    fail(Errc::invalid_argument, "confusion counts must be nonnegative");

  DetectionMetrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
  if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  m.f_score = f_score(m.precision, m.recall);
  return m;
}

std::string metric_to_string(const std::optional<double>& value) {
  if (!value) return "NA";
  return format_double(*value);
}

StabilityReport rank_stability(const RankedFeatureList& base, const RankedFeatureList& augmented,
                               int k) {
  if (k < 1) fail(Errc::invalid_argument, "k must be >= 1");

  auto top_k = [](const RankedFeatureList& list, size_t k_eff) {
    std::vector<const RankedFeature*> out;
    for (const auto& e : list.entries) {
      if (e.na) continue;
      out.push_back(&e);
      if (out.size() == k_eff) break;
    }
    return out;
  };

  auto count_non_na = [](const RankedFeatureList& list) {
    size_t n = 0;
    for (const auto& e : list.entries)
      if (!e.na) ++n;
    return n;
  };

  size_t k_eff = std::min({static_cast<size_t>(k), count_non_na(base), count_non_na(augmented)});
  StabilityReport report;
  if (k_eff == 0) return report;

  auto base_top = top_k(base, k_eff);
  auto aug_top = top_k(augmented, k_eff);

  std::unordered_map<std::string_view, int> aug_rank_of;
  for (const auto& e : augmented.entries)
    if (!e.na) aug_rank_of.emplace(e.feature, e.rank);

  std::unordered_map<std::string_view, const RankedFeature*> aug_top_set;
  for (const auto* e : aug_top) aug_top_set.emplace(e->feature, e);

  size_t overlap = 0, agree = 0;
  for (const auto* e : base_top) {
    if (aug_top_set.count(e->feature)) ++overlap;
    auto it = aug_rank_of.find(e->feature);
    if (it != aug_rank_of.end() && it->second == e->rank) ++agree;
  }
  report.top_k_overlap = static_cast<double>(overlap) / static_cast<double>(k_eff);
  report.rank_agreement = static_cast<double>(agree) / static_cast<double>(k_eff);

  // union of the two top-k sets, base display order first
  std::vector<const RankedFeature*> union_feats(base_top);
  for (const auto* e : aug_top) {
    bool seen = false;
    for (const auto* b : base_top)
      if (b->feature == e->feature) { seen = true; break; }
    if (!seen) union_feats.push_back(e);
  }
  std::unordered_map<std::string_view, int> base_rank_of;
  for (const auto& e : base.entries)
    if (!e.na) base_rank_of.emplace(e.feature, e.rank);

  for (const auto* e : union_feats) {
    auto b = base_rank_of.find(e->feature);
    auto a = aug_rank_of.find(e->feature);
    int br = b == base_rank_of.end() ? 0 : b->second;
    int ar = a == aug_rank_of.end() ? 0 : a->second;
    if (br != ar) report.changed.push_back({std::string(e->feature), br, ar});
  }
  return report;
}

}  // namespace rwpattern
