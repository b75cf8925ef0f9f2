#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "core/event.hpp"
#include "core/feature.hpp"
#include "core/ranking.hpp"

namespace rwpattern {

enum class Label { normal, infected };

const char* label_name(Label l);
Label parse_label(std::string_view s);

struct Document {
  std::string id;
  Label label = Label::normal;
  std::vector<std::pair<int32_t, int32_t>> counts;  // (term index, count), index ascending
  int64_t total_terms = 0;

  int32_t count_of(int32_t term) const;
};

/// Per-document feature counts over a shared vocabulary. Vocabulary order is
/// first-seen and recorded in the artifact, so rebuilding from the same input
/// reproduces identical files.
struct TermMatrix {
  std::vector<std::string> vocabulary;
  std::vector<Document> documents;

  size_t num_docs() const { return documents.size(); }
  size_t vocab_size() const { return vocabulary.size(); }
  int32_t find_term(std::string_view feature) const;  // -1 when absent
  int64_t document_frequency(int32_t term) const;
  std::vector<double> dense_row(size_t doc) const;
  uint64_t vocab_hash() const;
  bool has_label(Label l) const;
};

uint64_t hash_vocabulary(const std::vector<std::string>& vocabulary);

class MatrixBuilder {
 public:
  explicit MatrixBuilder(FeatureOptions opts = {}, bool binary_counts = false)
      : opts_(std::move(opts)), binary_(binary_counts) {}

  void add_document(std::string_view id, Label label, std::span<const EventRecord> events);
  TermMatrix build();  // EMPTY_CORPUS when no document was added

 private:
  FeatureOptions opts_;
  bool binary_;
  TermMatrix matrix_;
  std::unordered_map<std::string, int32_t> index_;
};

/// Window start/end offsets over a stream of n events: starts at multiples of
/// stride; the first window that reaches the end of the stream (possibly
/// short) is the last one emitted.
std::vector<std::pair<size_t, size_t>> window_spans(size_t n_events, size_t width, size_t stride);

/// Drop features whose |score| falls below min_abs_score (and, when asked,
/// columns constant across all documents). Documents are kept; counts of
/// surviving features are unchanged; totals are recomputed over the reduced
/// vocabulary. Throws ALL_FEATURES_PRUNED when nothing survives and
/// INVALID_ARGUMENT when the score list does not cover the vocabulary.
TermMatrix prune(const TermMatrix& matrix, const RankedFeatureList& scores, double min_abs_score,
                 bool drop_zero_variance);

/// Same documents, vocabulary restricted to entries with keep[i] != 0.
TermMatrix restrict_vocabulary(const TermMatrix& matrix, const std::vector<char>& keep);

/// Document subset (same vocabulary).
TermMatrix submatrix(const TermMatrix& matrix, const std::vector<size_t>& doc_indices);

void save_matrix(const TermMatrix& matrix, std::ostream& out);
void save_matrix_file(const TermMatrix& matrix, const std::string& path);
TermMatrix load_matrix(std::istream& in);
TermMatrix load_matrix_file(const std::string& path);

}  // namespace rwpattern
