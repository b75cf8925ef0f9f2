#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rwpattern {

enum class EventSource { enhanced, api_call };

/// One normalized host-log event. For enhanced events the verb/object/data
/// fields are set; for API-call events the api_* fields are. All strings are
/// lowercased and path/regkey values are already canonical.
struct EventRecord {
  EventSource source = EventSource::enhanced;

  // enhanced
  std::string event_verb;
  std::string object_kind;
  std::vector<std::pair<std::string, std::string>> data_fields;  // unique keys, parse order

  // api_call
  std::string api_name;
  std::string api_category;
  std::vector<std::string> api_argument_values;  // positional

  bool operator==(const EventRecord&) const = default;
};

}  // namespace rwpattern
