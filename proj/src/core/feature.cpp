#include "core/feature.hpp"

#include <algorithm>
#include <utility>

namespace rwpattern {

std::string make_feature_key(const EventRecord& event, const FeatureOptions& opts) {
  std::vector<std::pair<std::string, std::string>> pairs;
  if (event.source == EventSource::enhanced) {
    pairs.reserve(event.data_fields.size() + 2);
    for (const auto& [k, v] : event.data_fields) pairs.emplace_back("data_" + k, v);
    pairs.emplace_back("event", event.event_verb);
    pairs.emplace_back("object", event.object_kind);
  } else {
    pairs.emplace_back("api", event.api_name);
    for (int idx : opts.api_argument_indices) {
      if (idx >= 0 && static_cast<size_t>(idx) < event.api_argument_values.size())
        pairs.emplace_back("arguments_" + std::to_string(idx) + "_value",
                           event.api_argument_values[static_cast<size_t>(idx)]);
    }
    pairs.emplace_back("category", event.api_category);
  }
  std::sort(pairs.begin(), pairs.end());

  std::string key;
  for (const auto& [k, v] : pairs) {
    if (!key.empty()) key += '+';
    key += k;
    key += "+'";
    key += v;
    key += '\'';
  }
  return key;
}

}  // namespace rwpattern
