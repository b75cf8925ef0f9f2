#pragma once

#include <string>
#include <string_view>

#include "core/extra_trees.hpp"
#include "core/matrix.hpp"

namespace rwpattern {

struct GraphStyle {
  int max_levels = 3;  // deepest level drawn; anything below is elided
  std::string malicious_color = "blue";
  std::string normal_color = "brown";
  bool annotate_class_counts = true;
  bool annotate_impurity = true;
  bool annotate_correlation = true;
};

/// Pearson correlation between a feature's count column and the 0/1 label
/// vector (infected = 1). NaN when either side is constant.
double feature_label_correlation(const TermMatrix& matrix, int32_t term);

/// Render one tree of the forest as a DOT digraph. Split nodes are boxes
/// labeled with the feature text and threshold; a split is colored
/// malicious_color iff its feature occurs in at least one infected document
/// of the matrix. Subtrees below max_levels collapse into summary nodes.
/// Throws INDEX_OUT_OF_RANGE for a bad tree index and VOCABULARY_MISMATCH
/// when the matrix does not match the model's vocabulary hash.
std::string to_dot(const ExtraTreesModel& model, size_t tree_index, const TermMatrix& matrix,
                   const GraphStyle& style = {});

/// Minimal DOT grammar check: one digraph, balanced braces/brackets, node
/// statements before the edges that use them, well-formed attribute lists.
bool validate_dot(std::string_view text, std::string* error = nullptr);

}  // namespace rwpattern
