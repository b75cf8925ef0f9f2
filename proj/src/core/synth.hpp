#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "core/report.hpp"
#include "core/rng.hpp"

namespace rwpattern {

/// A named malicious behavior pattern: event templates planted into an
/// ambient stream. Planted feature keys are disjoint from the ambient
/// catalog's by construction (enforced by planted_feature_keys callers and
/// the test suite).
struct PatternSpec {
  std::string name;
  std::vector<RawEvent> planted_events;
  double injection_rate = 20.0;  // planted events per 100 ambient events
};

/// The built-in fixtures (wannacry-like, dbger-like, defray-like, locky-like,
/// cerber-like, gandcrab-like, nransom-like).
const std::vector<PatternSpec>& builtin_fixtures();
const PatternSpec* find_fixture(std::string_view name);  // nullptr when unknown

/// Ambient event templates (shared across all generated documents).
const std::vector<RawEvent>& ambient_catalog();

/// Head of the catalog used as the ambient base of infected streams: routine
/// high-frequency activity, so the infected document's background does not
/// introduce rare one-off features of its own.
size_t ambient_common_pool_size();

/// Canonical feature keys of a pattern's planted events.
std::vector<std::string> planted_feature_keys(const PatternSpec& pattern);

/// Deterministic ambient stream. Draws from the catalog with a Zipf-shaped
/// weight so the vocabulary grows sublinearly through reuse.
std::vector<RawEvent> gen_normal_stream(uint64_t seed, size_t n_events, bool common_only = false);

struct InfectedStream {
  std::vector<RawEvent> events;
  std::vector<size_t> planted_positions;  // indices into events, ascending
};

/// Interleave the pattern's templates (cycled in order) into the base stream
/// at seeded positions; ground-truth positions are recorded for window
/// labeling. injection_rate <= 0 returns the base unchanged.
InfectedStream gen_infected(uint64_t seed, std::vector<RawEvent> base, const PatternSpec& pattern,
                            double injection_rate);

struct SynthOptions {
  uint64_t seed = 42;
  size_t n_normal = 50;
  size_t events_per_doc = 200;
  size_t n_infected = 1;
  double injection_rate = 20.0;
  double confuser_fraction = 0.0;  // fraction of normal docs receiving one planted event
  bool stream_format = false;      // emit the line format instead of JSON reports
};

// Seed-stream ids, so normal documents, infected streams and confuser draws
// never share a random stream. Augmentation continues the normal doc index.
inline uint64_t normal_doc_seed(uint64_t seed, size_t index) { return derive_seed(seed, index); }
inline uint64_t infected_stream_seed(uint64_t seed, size_t index) {
  return derive_seed(seed, 0x10000000ull + index);
}
inline uint64_t confuser_seed(uint64_t seed, size_t index) {
  return derive_seed(seed, 0x20000000ull + index);
}

/// Write a whole corpus to a directory: normal_###.{json,events} plus, when a
/// fixture is given, infected_###.{json,events} with .truth sidecars listing
/// planted positions. Deterministic: same options, same bytes.
void write_corpus(const std::string& out_dir, const PatternSpec* fixture, const SynthOptions& opts);

}  // namespace rwpattern
