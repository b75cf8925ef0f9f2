#include "core/dot_export.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "core/errors.hpp"

namespace rwpattern {

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') { out += "\\n"; continue; }
    out += c;
  }
  return out;
}

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct DotWriter {
  const ExtraTreesModel& model;
  const TermMatrix& matrix;
  const GraphStyle& style;
  std::ostringstream nodes;
  std::ostringstream edges;
  int next_id = 0;

  std::string declare(const std::string& attrs) {
    std::string id = "n" + std::to_string(next_id++);
    nodes << "  " << id << " [" << attrs << "];\n";
    return id;
  }

  std::string node_label(const TreeNode* node) {
    std::string label;
    if (!node->is_leaf) {
      label = dot_escape(matrix.vocabulary[static_cast<size_t>(node->feature)]);
      label += "\\ncount \xe2\x89\xa4 " + fmt(node->threshold);
    } else {
      label = node->weight_infected >= node->weight_normal ? "infected" : "normal";
    }
    if (style.annotate_class_counts)
      label += "\\nweights n=" + fmt(node->weight_normal) + " i=" + fmt(node->weight_infected);
    if (style.annotate_impurity) label += "\\ngini " + fmt(node->impurity);
    if (style.annotate_correlation && !node->is_leaf) {
      double corr = feature_label_correlation(matrix, node->feature);
      label += std::isnan(corr) ? "\\ncorr na" : "\\ncorr " + fmt(corr, "%.3f");
    }
    return label;
  }

  bool feature_in_infected(int32_t term) const {
    for (const auto& doc : matrix.documents)
      if (doc.label == Label::infected && doc.count_of(term) > 0) return true;
    return false;
  }

  void summarize_subtree(const TreeNode* node, size_t& splits, size_t& leaves) {
    if (!node) return;
    if (node->is_leaf) { ++leaves; return; }
    ++splits;
    summarize_subtree(node->left.get(), splits, leaves);
    summarize_subtree(node->right.get(), splits, leaves);
  }

  std::string emit(const TreeNode* node) {
    if (node->depth > style.max_levels) {
      size_t splits = 0, leaves = 0;
      summarize_subtree(node, splits, leaves);
      std::string label = "... " + std::to_string(splits) + " splits, " +
                          std::to_string(leaves) + " leaves";
      return declare("label=\"" + label + "\", shape=plaintext");
    }
    if (node->is_leaf)
      return declare("label=\"" + node_label(node) + "\", shape=ellipse");

    const std::string& color =
        feature_in_infected(node->feature) ? style.malicious_color : style.normal_color;
    std::string id = declare("label=\"" + node_label(node) + "\", shape=box, color=" + color);
    std::string left = emit(node->left.get());
    std::string right = emit(node->right.get());
    edges << "  " << id << " -> " << left << " [label=\"\xe2\x89\xa4 " << fmt(node->threshold)
          << "\"];\n";
    edges << "  " << id << " -> " << right << " [label=\"> " << fmt(node->threshold) << "\"];\n";
    return id;
  }
};

}  // namespace

double feature_label_correlation(const TermMatrix& matrix, int32_t term) {
  size_t n = matrix.num_docs();
  if (n == 0) return std::nan("");
  double sum_x = 0, sum_y = 0;
  for (const auto& doc : matrix.documents) {
    sum_x += static_cast<double>(doc.count_of(term));
    sum_y += doc.label == Label::infected ? 1.0 : 0.0;
  }
  double mean_x = sum_x / static_cast<double>(n);
  double mean_y = sum_y / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (const auto& doc : matrix.documents) {
    double dx = static_cast<double>(doc.count_of(term)) - mean_x;
    double dy = (doc.label == Label::infected ? 1.0 : 0.0) - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nan("");
  return sxy / std::sqrt(sxx * syy);
}

std::string to_dot(const ExtraTreesModel& model, size_t tree_index, const TermMatrix& matrix,
                   const GraphStyle& style) {
  if (tree_index >= model.trees.size())
    fail(Errc::index_out_of_range, "tree index " + std::to_string(tree_index) + " out of range");
  if (matrix.vocab_hash() != model.vocab_hash)
    fail(Errc::vocabulary_mismatch, "matrix vocabulary does not match the model");
  if (style.max_levels < 1) fail(Errc::invalid_argument, "max_levels must be >= 1");

  DotWriter writer{model, matrix, style, {}, {}, 0};
  writer.emit(model.trees[tree_index].get());

  std::ostringstream out;
  out << "digraph tree" << tree_index << " {\n";
  out << "  graph [rankdir=TB];\n";
  out << "  node [fontname=\"Helvetica\"];\n";
  out << writer.nodes.str();
  out << writer.edges.str();
  out << "}\n";
  return out.str();
}

namespace {

struct DotParser {
  std::string_view text;
  size_t pos = 0;
  std::string error;

  bool at_end() { return pos >= text.size(); }

  void skip_space() {
    while (pos < text.size() &&
           (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' || text[pos] == '\r'))
      ++pos;
  }

  bool fail_at(const std::string& message) {
    error = message + " (offset " + std::to_string(pos) + ")";
    return false;
  }

  static bool id_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  }

  // bare identifier or double-quoted string
  bool read_id(std::string& out) {
    skip_space();
    if (at_end()) return fail_at("expected identifier");
    out.clear();
    if (text[pos] == '"') {
      ++pos;
      while (pos < text.size() && text[pos] != '"') {
        if (text[pos] == '\\') {
          ++pos;
          if (at_end()) return fail_at("dangling escape in string");
        }
        out += text[pos++];
      }
      if (at_end()) return fail_at("unterminated string");
      ++pos;
      return true;
    }
    if (!id_char(text[pos])) return fail_at("expected identifier");
    while (pos < text.size() && id_char(text[pos])) out += text[pos++];
    return true;
  }

  bool read_attr_list() {
    skip_space();
    if (at_end() || text[pos] != '[') return true;  // attribute list optional
    ++pos;
    for (;;) {
      skip_space();
      if (!at_end() && text[pos] == ']') { ++pos; return true; }
      std::string key, value;
      if (!read_id(key)) return false;
      skip_space();
      if (at_end() || text[pos] != '=') return fail_at("expected '=' in attribute");
      ++pos;
      if (!read_id(value)) return false;
      skip_space();
      if (!at_end() && text[pos] == ',') ++pos;
    }
  }

  bool parse(std::set<std::string>& declared) {
    skip_space();
    for (const char* kw = "digraph"; *kw; ++kw, ++pos)
      if (at_end() || text[pos] != *kw) return fail_at("expected 'digraph'");
    std::string name;
    skip_space();
    if (!at_end() && text[pos] != '{') {
      if (!read_id(name)) return false;
    }
    skip_space();
    if (at_end() || text[pos] != '{') return fail_at("expected '{'");
    ++pos;

    for (;;) {
      skip_space();
      if (at_end()) return fail_at("unbalanced braces: missing '}'");
      if (text[pos] == '}') { ++pos; break; }
      std::string id;
      if (!read_id(id)) return false;
      skip_space();
      if (!at_end() && text[pos] == '-') {
        if (pos + 1 >= text.size() || text[pos + 1] != '>') return fail_at("expected '->'");
        pos += 2;
        std::string target;
        if (!read_id(target)) return false;
        if (id != "graph" && id != "node" && id != "edge") {
          if (!declared.count(id)) return fail_at("edge from undeclared node '" + id + "'");
          if (!declared.count(target)) return fail_at("edge to undeclared node '" + target + "'");
        }
        if (!read_attr_list()) return false;
      } else if (id == "graph" || id == "node" || id == "edge") {
        if (!read_attr_list()) return false;
      } else {
        declared.insert(id);
        if (!read_attr_list()) return false;
      }
      skip_space();
      if (!at_end() && text[pos] == ';') ++pos;
    }
    skip_space();
    if (!at_end()) return fail_at("trailing content after '}'");
    return true;
  }
};

}  // namespace

bool validate_dot(std::string_view text, std::string* error) {
  DotParser parser{text, 0, {}};
  std::set<std::string> declared;
  bool ok = parser.parse(declared);
  if (!ok && error) *error = parser.error;
  return ok;
}

}  // namespace rwpattern
