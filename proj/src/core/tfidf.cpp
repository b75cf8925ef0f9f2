#include "core/tfidf.hpp"

#include <cmath>
#include <unordered_set>

#include "core/errors.hpp"

namespace rwpattern {

double term_frequency(int32_t term, const Document& doc) {
  if (doc.total_terms <= 0) fail(Errc::empty_document, "document has no terms: " + doc.id);
  return static_cast<double>(doc.count_of(term)) / static_cast<double>(doc.total_terms);
}

double inverse_document_frequency(int64_t document_frequency, size_t corpus_size) {
  return std::log(static_cast<double>(corpus_size) /
                  (1.0 + static_cast<double>(document_frequency)));
}

double inverse_document_frequency(const TermMatrix& matrix, int32_t term) {
  return inverse_document_frequency(matrix.document_frequency(term), matrix.num_docs());
}

RankedFeatureList tfidf_rank(const TermMatrix& matrix, const std::vector<std::string>& target_doc_ids) {
  if (target_doc_ids.empty()) fail(Errc::invalid_argument, "no target documents given");

  std::unordered_set<std::string> wanted(target_doc_ids.begin(), target_doc_ids.end());
  std::vector<int64_t> target_counts(matrix.vocab_size(), 0);
  int64_t target_total = 0;
  size_t found = 0;
  for (const auto& doc : matrix.documents) {
    if (!wanted.count(doc.id)) continue;
    ++found;
    for (const auto& [term, count] : doc.counts) {
      target_counts[static_cast<size_t>(term)] += count;
      target_total += count;
    }
  }
  if (found != wanted.size()) {
    for (const auto& id : wanted) {
      bool present = false;
      for (const auto& doc : matrix.documents)
        if (doc.id == id) { present = true; break; }
      if (!present) fail(Errc::unknown_document_id, "no such document: " + id);
    }
  }
  if (target_total <= 0) fail(Errc::empty_document, "target documents are empty");

  // df per term in one pass
  std::vector<int64_t> df(matrix.vocab_size(), 0);
  for (const auto& doc : matrix.documents)
    for (const auto& [term, count] : doc.counts)
      if (count > 0) ++df[static_cast<size_t>(term)];

  RankedFeatureList list;
  list.method = RankMethod::tfidf;
  list.entries.reserve(matrix.vocab_size());
  for (size_t i = 0; i < matrix.vocab_size(); ++i) {
    double tf = static_cast<double>(target_counts[i]) / static_cast<double>(target_total);
    double idf = inverse_document_frequency(df[i], matrix.num_docs());
    list.entries.push_back({matrix.vocabulary[i], tf * idf, 0, false});
  }
  sort_and_rank(list.entries);
  return list;
}

}  // namespace rwpattern
