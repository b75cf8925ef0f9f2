#pragma once

#include <string>
#include <vector>

#include "core/event.hpp"

namespace rwpattern {

struct FeatureOptions {
  /// API argument positions folded into the feature key.
  std::vector<int> api_argument_indices = {1};
};

/// Canonical feature string for one event: `key+'value'` pairs joined by `+`,
/// keys sorted lexicographically. Enhanced data keys are prefixed `data_`;
/// API arguments appear as `arguments_<i>_value` for configured indices only.
std::string make_feature_key(const EventRecord& event, const FeatureOptions& opts = {});

}  // namespace rwpattern
