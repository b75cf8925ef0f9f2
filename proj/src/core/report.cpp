#include "core/report.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/canonical.hpp"
#include "core/errors.hpp"

namespace rwpattern {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string json_scalar_to_string(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  return v.dump();
}

bool is_pathlike_key(std::string_view key) { return key == "file" || key == "path"; }
bool is_regkey_key(std::string_view key) { return key == "regkey" || key == "key"; }

std::vector<RawEvent> decode_json_report(std::string_view bytes) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_report, std::string("report is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(Errc::malformed_report, "report root must be an object");

  std::vector<RawEvent> events;
  if (auto it = doc.find("enhanced"); it != doc.end()) {
    if (!it->is_array()) fail(Errc::malformed_report, "\"enhanced\" must be an array");
    for (const auto& entry : *it) {
      if (!entry.is_object()) fail(Errc::malformed_report, "enhanced entry must be an object");
      RawEvent ev;
      ev.source = EventSource::enhanced;
      ev.event_verb = entry.value("event", std::string());
      ev.object_kind = entry.value("object", std::string());
      if (ev.event_verb.empty() || ev.object_kind.empty())
        fail(Errc::malformed_report, "enhanced entry missing event/object");
      if (auto d = entry.find("data"); d != entry.end() && d->is_object()) {
        for (auto& [k, v] : d->items()) ev.data.emplace_back(k, json_scalar_to_string(v));
      }
      events.push_back(std::move(ev));
    }
  }
  if (auto it = doc.find("behavior"); it != doc.end()) {
    if (!it->is_object()) fail(Errc::malformed_report, "\"behavior\" must be an object");
    if (auto procs = it->find("processes"); procs != it->end()) {
      if (!procs->is_array()) fail(Errc::malformed_report, "\"processes\" must be an array");
      for (const auto& proc : *procs) {
        if (!proc.is_object()) continue;
        auto calls = proc.find("calls");
        if (calls == proc.end() || !calls->is_array()) continue;
        for (const auto& call : *calls) {
          if (!call.is_object()) fail(Errc::malformed_report, "api call must be an object");
          RawEvent ev;
          ev.source = EventSource::api_call;
          ev.api_name = call.value("api", std::string());
          ev.api_category = call.value("category", std::string());
          if (ev.api_name.empty() || ev.api_category.empty())
            fail(Errc::malformed_report, "api call missing api/category");
          if (auto args = call.find("arguments"); args != call.end() && args->is_array()) {
            for (const auto& a : *args) {
              if (a.is_object())
                ev.api_argument_values.push_back(json_scalar_to_string(a.value("value", ordered_json())));
              else
                ev.api_argument_values.push_back(json_scalar_to_string(a));
            }
          }
          events.push_back(std::move(ev));
        }
      }
    }
  }
  return events;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

// Stream lines carry already-canonical values: decode without re-canonicalizing.
EventRecord decode_stream_line(std::string_view line, size_t lineno) {
  auto fields = split(line, '|');
  if (fields.size() != 4)
    fail(Errc::malformed_report,
         "line " + std::to_string(lineno) + ": expected 4 '|'-separated fields");

  EventRecord ev;
  std::string source(fields[0]);
  if (source == "enhanced") {
    ev.source = EventSource::enhanced;
    ev.event_verb = to_lower(fields[1]);
    ev.object_kind = to_lower(fields[2]);
    if (ev.event_verb.empty() || ev.object_kind.empty())
      fail(Errc::malformed_report, "line " + std::to_string(lineno) + ": missing verb/object");
  } else if (source == "api_call") {
    ev.source = EventSource::api_call;
    ev.api_name = to_lower(fields[1]);
    ev.api_category = to_lower(fields[2]);
    if (ev.api_name.empty() || ev.api_category.empty())
      fail(Errc::malformed_report, "line " + std::to_string(lineno) + ": missing api/category");
  } else {
    fail(Errc::malformed_report, "line " + std::to_string(lineno) + ": unknown source");
  }

  if (!fields[3].empty()) {
    for (auto pair : split(fields[3], ';')) {
      if (pair.empty()) continue;
      size_t eq = pair.find('=');
      if (eq == std::string_view::npos)
        fail(Errc::malformed_report, "line " + std::to_string(lineno) + ": bad key=value pair");
      std::string key = to_lower(pair.substr(0, eq));
      std::string value = to_lower(pair.substr(eq + 1));
      if (ev.source == EventSource::enhanced) {
        ev.data_fields.emplace_back(std::move(key), std::move(value));
      } else {
        size_t index = 0;
        try {
          index = std::stoul(key);
        } catch (...) {
          fail(Errc::malformed_report,
               "line " + std::to_string(lineno) + ": api argument key must be an index");
        }
        if (ev.api_argument_values.size() <= index) ev.api_argument_values.resize(index + 1);
        ev.api_argument_values[index] = std::move(value);
      }
    }
  }
  return ev;
}

}  // namespace

RawEvent RawEvent::enhanced(std::string verb, std::string object,
                            std::vector<std::pair<std::string, std::string>> data) {
  RawEvent ev;
  ev.source = EventSource::enhanced;
  ev.event_verb = std::move(verb);
  ev.object_kind = std::move(object);
  ev.data = std::move(data);
  return ev;
}

RawEvent RawEvent::api(std::string name, std::string category, std::vector<std::string> args) {
  RawEvent ev;
  ev.source = EventSource::api_call;
  ev.api_name = std::move(name);
  ev.api_category = std::move(category);
  ev.api_argument_values = std::move(args);
  return ev;
}

EventRecord canonicalize_raw(const RawEvent& raw, const IngestOptions& opts) {
  EventRecord ev;
  ev.source = raw.source;
  if (raw.source == EventSource::enhanced) {
    ev.event_verb = to_lower(raw.event_verb);
    ev.object_kind = to_lower(raw.object_kind);
    for (const auto& [key, value] : raw.data) {
      std::string k = to_lower(key);
      // first occurrence of a key wins
      bool dup = false;
      for (const auto& existing : ev.data_fields)
        if (existing.first == k) { dup = true; break; }
      if (dup) continue;
      std::string v;
      if (is_pathlike_key(k) && !value.empty()) {
        v = canonicalize_path(value);
      } else if (is_regkey_key(k) && !value.empty()) {
        v = canonicalize_regkey(value, opts.regkey_tail_components).token;
      } else {
        v = to_lower(value);
      }
      ev.data_fields.emplace_back(std::move(k), std::move(v));
    }
  } else {
    ev.api_name = to_lower(raw.api_name);
    ev.api_category = to_lower(raw.api_category);
    ev.api_argument_values.reserve(raw.api_argument_values.size());
    for (const auto& v : raw.api_argument_values) ev.api_argument_values.push_back(to_lower(v));
  }
  return ev;
}

std::vector<EventRecord> parse_report(std::string_view bytes, const IngestOptions& opts) {
  size_t first = bytes.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) fail(Errc::empty_report, "report contains no events");

  std::vector<EventRecord> events;
  if (bytes[first] == '{') {
    for (const auto& raw : decode_json_report(bytes)) events.push_back(canonicalize_raw(raw, opts));
  } else {
    size_t lineno = 0;
    for (auto line : split(bytes, '\n')) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      events.push_back(decode_stream_line(line, lineno));
    }
  }
  if (events.empty()) fail(Errc::empty_report, "report contains no events");
  return events;
}

std::vector<EventRecord> parse_report_file(const std::string& path, const IngestOptions& opts) {
  return parse_report(read_file(path), opts);
}

std::string report_to_json(const std::vector<RawEvent>& events) {
  ordered_json enhanced = ordered_json::array();
  ordered_json calls = ordered_json::array();
  for (const auto& ev : events) {
    if (ev.source == EventSource::enhanced) {
      ordered_json data = ordered_json::object();
      for (const auto& [k, v] : ev.data) data[k] = v;
      enhanced.push_back({{"event", ev.event_verb}, {"object", ev.object_kind}, {"data", data}});
    } else {
      ordered_json args = ordered_json::array();
      for (size_t i = 0; i < ev.api_argument_values.size(); ++i)
        args.push_back({{"name", "arg" + std::to_string(i)}, {"value", ev.api_argument_values[i]}});
      calls.push_back({{"api", ev.api_name}, {"category", ev.api_category}, {"arguments", args}});
    }
  }
  ordered_json doc;
  doc["enhanced"] = std::move(enhanced);
  doc["behavior"] = {{"processes", ordered_json::array({{{"calls", std::move(calls)}}})}};
  return doc.dump(2) + "\n";
}

std::string events_to_stream(const std::vector<EventRecord>& events) {
  std::ostringstream out;
  for (const auto& ev : events) {
    if (ev.source == EventSource::enhanced) {
      out << "enhanced|" << ev.event_verb << '|' << ev.object_kind << '|';
      bool first = true;
      for (const auto& [k, v] : ev.data_fields) {
        if (!first) out << ';';
        out << k << '=' << v;
        first = false;
      }
    } else {
      out << "api_call|" << ev.api_name << '|' << ev.api_category << '|';
      bool first = true;
      for (size_t i = 0; i < ev.api_argument_values.size(); ++i) {
        if (ev.api_argument_values[i].empty()) continue;
        if (!first) out << ';';
        out << i << '=' << ev.api_argument_values[i];
        first = false;
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(Errc::io, "read failed: " + path);
  return std::move(buf).str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, "cannot open for write: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(Errc::io, "write failed: " + path);
}

}  // namespace rwpattern
