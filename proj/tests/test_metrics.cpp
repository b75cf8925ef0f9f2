#include <doctest.h>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/rng.hpp"

using namespace rwpattern;

namespace {

RankedFeatureList list_of(std::vector<std::pair<std::string, double>> scored,
                          std::vector<std::string> na = {}) {
  RankedFeatureList list;
  list.method = RankMethod::et;
  for (auto& [f, s] : scored) list.entries.push_back({std::move(f), s, 0, false});
  for (auto& f : na) list.entries.push_back({std::move(f), 0.0, 0, true});
  sort_and_rank(list.entries);
  return list;
}

}  // namespace

TEST_CASE("f-score reproduces reported rows from precision and recall") {
  CHECK(*f_score(1.0, 0.717) == doctest::Approx(0.835).epsilon(0.0007));
  CHECK(*f_score(1.0, 0.308) == doctest::Approx(0.471).epsilon(0.0011));
}

TEST_CASE("metrics from confusion counts") {
  DetectionMetrics m = metrics({2, 1, 1, 6});
  CHECK(m.accuracy == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(*m.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(*m.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(*m.f_score == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("undefined denominators become NA, not zero") {
  DetectionMetrics no_positives = metrics({0, 0, 2, 5});
  CHECK_FALSE(no_positives.precision.has_value());
  CHECK(*no_positives.recall == 0.0);
  CHECK_FALSE(no_positives.f_score.has_value());
  CHECK(metric_to_string(no_positives.precision) == "NA");

  DetectionMetrics no_true = metrics({0, 3, 0, 5});
  CHECK(*no_true.precision == 0.0);
  CHECK_FALSE(no_true.recall.has_value());

  CHECK_THROWS_AS(metrics({0, 0, 0, 0}), Error);
}

TEST_CASE("f-score is zero when precision and recall are both zero") {
  DetectionMetrics m = metrics({0, 3, 4, 5});
  CHECK(*m.precision == 0.0);
  CHECK(*m.recall == 0.0);
  CHECK(*m.f_score == 0.0);
}

TEST_CASE("f-score identity holds to machine precision") {
  Rand rng(8);
  for (int i = 0; i < 500; ++i) {
    double p = rng.unit();
    double r = rng.unit();
    if (p + r <= 0.0) continue;
    double f = *f_score(p, r);
    CHECK(f == doctest::Approx(2.0 * p * r / (p + r)).epsilon(1e-12));
  }
}

TEST_CASE("rank stability on identical, swapped and disjoint lists") {
  auto base = list_of({{"a", 10}, {"b", 9}, {"c", 8}, {"d", 7}, {"e", 6},
                       {"f", 5}, {"g", 4}, {"h", 3}, {"i", 2}, {"j", 1}, {"k", 0.5}});

  SUBCASE("identical") {
    auto r = rank_stability(base, base, 10);
    CHECK(r.top_k_overlap == 1.0);
    CHECK(r.rank_agreement == 1.0);
    CHECK(r.changed.empty());
  }
  SUBCASE("two adjacent swaps keep the set but move four ranks") {
    auto swapped = list_of({{"b", 10}, {"a", 9}, {"c", 8}, {"d", 7}, {"e", 6},
                            {"f", 5}, {"g", 4}, {"h", 3}, {"j", 2}, {"i", 1}, {"k", 0.5}});
    auto r = rank_stability(base, swapped, 10);
    CHECK(r.top_k_overlap == 1.0);
    CHECK(r.rank_agreement == doctest::Approx(0.6));
    CHECK(r.changed.size() == 4);
  }
  SUBCASE("disjoint top sets") {
    auto other = list_of({{"z1", 10}, {"z2", 9}, {"z3", 8}, {"z4", 7}, {"z5", 6},
                          {"z6", 5}, {"z7", 4}, {"z8", 3}, {"z9", 2}, {"z10", 1}});
    auto r = rank_stability(base, other, 10);
    CHECK(r.top_k_overlap == 0.0);
  }
}

TEST_CASE("overlap is symmetric and NA entries stay out of the top set") {
  Rand rng(3);
  const char* pool[] = {"p", "q", "r", "s", "t", "u", "v", "w", "x", "y", "z"};
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<std::pair<std::string, double>> a, b;
    for (const char* f : pool) {
      a.emplace_back(f, rng.unit());
      b.emplace_back(f, rng.unit());
    }
    auto la = list_of(a);
    auto lb = list_of(b);
    int k = 1 + static_cast<int>(rng.below(8));
    CHECK(rank_stability(la, lb, k).top_k_overlap ==
          doctest::Approx(rank_stability(lb, la, k).top_k_overlap));
  }

  auto with_na = list_of({{"a", 5}, {"b", 4}}, {"c", "d"});
  auto other = list_of({{"a", 5}, {"c", 4}, {"b", 3}, {"d", 2}});
  auto r = rank_stability(with_na, other, 3);
  // k shrinks to the two non-NA entries of the first list
  CHECK(r.top_k_overlap == 1.0);
}
