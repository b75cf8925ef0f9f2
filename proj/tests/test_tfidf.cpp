#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "core/report.hpp"
#include "core/rng.hpp"
#include "core/synth.hpp"
#include "core/tfidf.hpp"

using namespace rwpattern;

namespace {

EventRecord word(const std::string& token) {
  EventRecord ev;
  ev.source = EventSource::enhanced;
  ev.event_verb = "read";
  ev.object_kind = "file";
  ev.data_fields.emplace_back("file", token);
  return ev;
}

// corpus of four documents: "w" occurs 3x in the infected one only, "a" is in
// every document, "b"/"c" are ambient noise absent from the infected one
TermMatrix worked_corpus() {
  MatrixBuilder builder;
  std::vector<EventRecord> infected{word("w"), word("w"), word("w"), word("a")};
  builder.add_document("infected", Label::infected, infected);
  for (int i = 0; i < 3; ++i) {
    std::vector<EventRecord> normal{word("a"), word("b"), word("c")};
    builder.add_document("n" + std::to_string(i), Label::normal, normal);
  }
  return builder.build();
}

}  // namespace

TEST_CASE("term frequency is count over document total") {
  TermMatrix m = worked_corpus();
  const Document& infected = m.documents[0];
  int32_t w = m.find_term(make_feature_key(word("w")));
  int32_t a = m.find_term(make_feature_key(word("a")));
  int32_t b = m.find_term(make_feature_key(word("b")));
  REQUIRE(w >= 0);
  CHECK(term_frequency(w, infected) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(term_frequency(a, infected) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(term_frequency(b, infected) == 0.0);

  Document single;
  single.id = "one";
  single.counts = {{0, 1}};
  single.total_terms = 1;
  CHECK(term_frequency(0, single) == 1.0);

  Document empty;
  empty.id = "empty";
  CHECK_THROWS_AS(term_frequency(0, empty), Error);
}

TEST_CASE("idf matches the smoothed formula and is monotone in df") {
  CHECK(inverse_document_frequency(1, 4) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(inverse_document_frequency(4, 4) == doctest::Approx(std::log(0.8)).epsilon(1e-12));
  CHECK(inverse_document_frequency(4, 4) < 0.0);
  CHECK(inverse_document_frequency(0, 1) == 0.0);

  for (int64_t df = 0; df < 10; ++df)
    CHECK(inverse_document_frequency(df + 1, 10) < inverse_document_frequency(df, 10));
}

TEST_CASE("tfidf ranking puts the infected-only term first") {
  TermMatrix m = worked_corpus();
  auto list = tfidf_rank(m, {"infected"});
  REQUIRE(list.entries.size() == 4);

  const std::string w_key = make_feature_key(word("w"));
  const std::string a_key = make_feature_key(word("a"));
  CHECK(list.entries[0].feature == w_key);
  CHECK(list.entries[0].rank == 1);
  CHECK(list.entries[0].score == doctest::Approx(0.75 * std::log(2.0)).epsilon(1e-12));
  CHECK(list.entries[0].score == doctest::Approx(0.5198603854199589).epsilon(1e-10));

  // "a" occurs in all four documents: negative score, below the zero-score
  // terms that never occur in the infected document
  const RankedFeature* a_entry = list.find(a_key);
  REQUIRE(a_entry);
  CHECK(a_entry->score == doctest::Approx(0.25 * std::log(0.8)).epsilon(1e-12));
  CHECK(a_entry->score == doctest::Approx(-0.05578588782855244).epsilon(1e-10));
  CHECK(list.entries.back().feature == a_key);
  CHECK(list.entries[1].score == 0.0);
  CHECK(list.entries[2].score == 0.0);
}

TEST_CASE("tfidf guarantee: positive score implies presence in the target") {
  MatrixBuilder builder;
  for (size_t doc = 0; doc < 8; ++doc) {
    auto raw = gen_normal_stream(derive_seed(11, doc), 120);
    std::vector<EventRecord> events;
    for (const auto& ev : raw) events.push_back(canonicalize_raw(ev));
    builder.add_document("doc" + std::to_string(doc), doc == 0 ? Label::infected : Label::normal,
                         events);
  }
  TermMatrix m = builder.build();
  auto list = tfidf_rank(m, {"doc0"});

  const Document& target = m.documents[0];
  double tf_sum = 0.0;
  for (const auto& [term, count] : target.counts) tf_sum += term_frequency(term, target);
  CHECK(tf_sum == doctest::Approx(1.0).epsilon(1e-9));

  for (const auto& e : list.entries) {
    if (e.score > 0.0) {
      int32_t term = m.find_term(e.feature);
      CHECK(target.count_of(term) > 0);
    }
  }
}

TEST_CASE("ranking ignores permutations of non-target documents") {
  TermMatrix m = worked_corpus();
  auto before = tfidf_rank(m, {"infected"});
  std::swap(m.documents[1], m.documents[3]);
  auto after = tfidf_rank(m, {"infected"});
  REQUIRE(before.entries.size() == after.entries.size());
  for (size_t i = 0; i < before.entries.size(); ++i) {
    CHECK(before.entries[i].feature == after.entries[i].feature);
    CHECK(before.entries[i].rank == after.entries[i].rank);
    CHECK(before.entries[i].score == after.entries[i].score);
  }
}

TEST_CASE("multiple targets concatenate counts") {
  MatrixBuilder builder;
  std::vector<EventRecord> d1{word("w"), word("a")};
  std::vector<EventRecord> d2{word("w"), word("w")};
  std::vector<EventRecord> d3{word("a"), word("b")};
  builder.add_document("i1", Label::infected, d1);
  builder.add_document("i2", Label::infected, d2);
  builder.add_document("n1", Label::normal, d3);
  TermMatrix m = builder.build();

  auto list = tfidf_rank(m, {"i1", "i2"});
  const RankedFeature* w_entry = list.find(make_feature_key(word("w")));
  REQUIRE(w_entry);
  // concatenated target: w count 3 of 4 total; df(w) = 2 of N = 3
  CHECK(w_entry->score == doctest::Approx(0.75 * std::log(1.0)).epsilon(1e-12));
}

TEST_CASE("tfidf error paths") {
  TermMatrix m = worked_corpus();
  try {
    tfidf_rank(m, {"missing"});
    FAIL("expected UNKNOWN_DOCUMENT_ID");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_document_id);
  }
  CHECK_THROWS_AS(tfidf_rank(m, {}), Error);
}

TEST_CASE("planted fixture features rank in the tfidf top ten") {
  const PatternSpec* fixture = find_fixture("wannacry-like");
  REQUIRE(fixture);
  MatrixBuilder builder;
  std::vector<EventRecord> events;
  for (size_t doc = 0; doc < 30; ++doc) {
    auto raw = gen_normal_stream(normal_doc_seed(404, doc), 200);
    events.clear();
    for (const auto& ev : raw) events.push_back(canonicalize_raw(ev));
    builder.add_document("normal" + std::to_string(doc), Label::normal, events);
  }
  uint64_t stream_seed = infected_stream_seed(404, 0);
  auto infected = gen_infected(derive_seed(stream_seed, 1),
                               gen_normal_stream(stream_seed, 200, true), *fixture, 20.0);
  events.clear();
  for (const auto& ev : infected.events) events.push_back(canonicalize_raw(ev));
  builder.add_document("infected0", Label::infected, events);
  TermMatrix m = builder.build();
  CHECK(m.vocab_size() >= 500);

  auto list = tfidf_rank(m, {"infected0"});
  for (const auto& key : planted_feature_keys(*fixture)) {
    const RankedFeature* e = list.find(key);
    REQUIRE_MESSAGE(e, key);
    CHECK_MESSAGE(e->rank <= 10, key << " rank " << e->rank);
  }
}
