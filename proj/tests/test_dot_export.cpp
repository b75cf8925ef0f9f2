#include <doctest.h>

#include <cmath>

#include "core/dot_export.hpp"
#include "core/errors.hpp"
#include "core/extra_trees.hpp"
#include "core/rng.hpp"

using namespace rwpattern;

namespace {

TermMatrix matrix_from_rows(const std::vector<std::vector<int32_t>>& rows,
                            const std::vector<Label>& labels) {
  TermMatrix m;
  size_t width = rows.empty() ? 0 : rows.front().size();
  for (size_t j = 0; j < width; ++j) m.vocabulary.push_back("feat_" + std::to_string(j));
  for (size_t i = 0; i < rows.size(); ++i) {
    Document doc;
    doc.id = "d" + std::to_string(i);
    doc.label = labels[i];
    for (size_t j = 0; j < width; ++j)
      if (rows[i][j]) {
        doc.counts.emplace_back(static_cast<int32_t>(j), rows[i][j]);
        doc.total_terms += rows[i][j];
      }
    m.documents.push_back(std::move(doc));
  }
  return m;
}

size_t count_occurrences(const std::string& text, const std::string& needle) {
  size_t count = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

TermMatrix separator_matrix() {
  return matrix_from_rows({{1, 3}, {1, 3}, {0, 3}, {0, 3}, {0, 3}},
                          {Label::infected, Label::infected, Label::normal, Label::normal,
                           Label::normal});
}

}  // namespace

TEST_CASE("label correlation against the 0/1 class vector") {
  TermMatrix m = separator_matrix();
  CHECK(feature_label_correlation(m, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isnan(feature_label_correlation(m, 1)));  // constant column

  TermMatrix anti = matrix_from_rows({{0}, {0}, {2}, {2}},
                                     {Label::infected, Label::infected, Label::normal,
                                      Label::normal});
  CHECK(feature_label_correlation(anti, 0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("single-leaf tree renders as one node, no edges") {
  auto m = matrix_from_rows({{2}, {2}}, {Label::infected, Label::normal});
  EtConfig cfg;
  cfg.seed = 9;
  cfg.n_trees = 1;
  auto model = fit_et(m, cfg);

  std::string dot = to_dot(model, 0, m);
  CHECK(validate_dot(dot));
  CHECK(count_occurrences(dot, "shape=ellipse") == 1);
  CHECK(count_occurrences(dot, "shape=box") == 0);
  CHECK(count_occurrences(dot, "->") == 0);
}

TEST_CASE("depth-two tree fits fully under the default cap") {
  TermMatrix m = separator_matrix();
  EtConfig cfg;
  cfg.seed = 4;
  cfg.n_trees = 1;
  auto model = fit_et(m, cfg);

  std::string dot = to_dot(model, 0, m);
  CHECK(validate_dot(dot));
  CHECK(count_occurrences(dot, "shape=box") == 1);
  CHECK(count_occurrences(dot, "shape=ellipse") == 2);
  CHECK(count_occurrences(dot, "shape=plaintext") == 0);
  CHECK(count_occurrences(dot, "->") == 2);

  // separator feature occurs only in infected documents: malicious color,
  // and its correlation annotation is a perfect 1.000
  CHECK(dot.find("color=blue") != std::string::npos);
  CHECK(dot.find("corr 1.000") != std::string::npos);
}

TEST_CASE("coloring reflects presence in infected documents, not tree shape") {
  // feature 0 occurs only in normal documents but still separates
  TermMatrix m = matrix_from_rows({{0, 3}, {0, 3}, {1, 3}, {1, 3}, {1, 3}},
                                  {Label::infected, Label::infected, Label::normal,
                                   Label::normal, Label::normal});
  EtConfig cfg;
  cfg.seed = 4;
  cfg.n_trees = 1;
  auto model = fit_et(m, cfg);
  std::string dot = to_dot(model, 0, m);
  CHECK(dot.find("color=brown") != std::string::npos);
  CHECK(dot.find("color=blue") == std::string::npos);
}

TEST_CASE("deep trees elide below max_levels with summary nodes") {
  Rand rng(60);
  std::vector<std::vector<int32_t>> rows;
  std::vector<Label> labels;
  for (int i = 0; i < 40; ++i) {
    rows.push_back({static_cast<int32_t>(rng.below(8)), static_cast<int32_t>(rng.below(8)),
                    static_cast<int32_t>(rng.below(8)), static_cast<int32_t>(i)});
    labels.push_back(i % 3 == 0 ? Label::infected : Label::normal);
  }
  TermMatrix m = matrix_from_rows(rows, labels);
  EtConfig cfg;
  cfg.seed = 12;
  cfg.n_trees = 4;
  auto model = fit_et(m, cfg);

  for (size_t t = 0; t < model.trees.size(); ++t) {
    for (int max_levels : {1, 3}) {
      GraphStyle style;
      style.max_levels = max_levels;
      std::string dot = to_dot(model, t, m, style);
      std::string why;
      CHECK_MESSAGE(validate_dot(dot, &why), why);
      size_t structural =
          count_occurrences(dot, "shape=box") + count_occurrences(dot, "shape=ellipse");
      CHECK(structural <= (size_t{1} << (max_levels + 1)) - 1);
    }
  }

  GraphStyle one;
  one.max_levels = 1;
  std::string dot = to_dot(model, 0, m, one);
  if (!model.trees[0]->is_leaf) {
    CHECK(count_occurrences(dot, "shape=box") == 1);
    CHECK(count_occurrences(dot, "shape=plaintext") == 2);
  }
}

TEST_CASE("graph export errors") {
  TermMatrix m = separator_matrix();
  EtConfig cfg;
  cfg.seed = 4;
  cfg.n_trees = 2;
  auto model = fit_et(m, cfg);

  try {
    to_dot(model, 2, m);
    FAIL("expected INDEX_OUT_OF_RANGE");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::index_out_of_range);
  }

  TermMatrix other = matrix_from_rows({{1, 1, 1}}, {Label::normal});
  try {
    to_dot(model, 0, other);
    FAIL("expected VOCABULARY_MISMATCH");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::vocabulary_mismatch);
  }
}

TEST_CASE("dot validator accepts our output and rejects broken graphs") {
  CHECK(validate_dot("digraph g { a; b; a -> b [label=\"x\"]; }"));
  CHECK(validate_dot("digraph { n0 [label=\"a \\\" quote\"]; }"));

  std::string error;
  CHECK_FALSE(validate_dot("graph g { a; }", &error));          // not a digraph
  CHECK_FALSE(validate_dot("digraph g { a; b; a -> c; }"));     // undeclared endpoint
  CHECK_FALSE(validate_dot("digraph g { a -> b; a; b; }"));     // edge before declarations
  CHECK_FALSE(validate_dot("digraph g { a; "));                 // unbalanced brace
  CHECK_FALSE(validate_dot("digraph g { a [label=\"oops]; }")); // unterminated string
  CHECK_FALSE(validate_dot("digraph g { a; } trailing"));
  CHECK_FALSE(validate_dot(""));
}
