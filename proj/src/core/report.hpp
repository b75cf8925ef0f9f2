#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core/event.hpp"

namespace rwpattern {

/// Event as it appears in a raw report, before canonicalization. Produced by
/// the report decoders and by the synthetic generator.
struct RawEvent {
  EventSource source = EventSource::enhanced;

  // enhanced
  std::string event_verb;
  std::string object_kind;
  std::vector<std::pair<std::string, std::string>> data;

  // api_call
  std::string api_name;
  std::string api_category;
  std::vector<std::string> api_argument_values;

  static RawEvent enhanced(std::string verb, std::string object,
                           std::vector<std::pair<std::string, std::string>> data);
  static RawEvent api(std::string name, std::string category, std::vector<std::string> args);
};

struct IngestOptions {
  int regkey_tail_components = 1;
};

/// Lowercase everything; canonicalize "file"/"path" data values as paths and
/// "regkey"/"key" values as registry keys. API argument values are opaque and
/// only lowercased.
EventRecord canonicalize_raw(const RawEvent& raw, const IngestOptions& opts = {});

/// Parse a behavior report. Accepts the JSON report format (object with
/// "enhanced" and "behavior" sections; unknown sections ignored) or the
/// line-oriented canonical event stream. Throws MALFORMED_REPORT on
/// undecodable input and EMPTY_REPORT when no event is found.
std::vector<EventRecord> parse_report(std::string_view bytes, const IngestOptions& opts = {});
std::vector<EventRecord> parse_report_file(const std::string& path, const IngestOptions& opts = {});

/// Encode raw events as the JSON report format (format A).
std::string report_to_json(const std::vector<RawEvent>& events);

/// Encode events as the canonical line stream (format B):
///   enhanced|<verb>|<object>|key=value;key=value
///   api_call|<api>|<category>|<index>=<value>;...
/// Values already canonical; '|' and ';' must not occur in them.
std::string events_to_stream(const std::vector<EventRecord>& events);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace rwpattern
