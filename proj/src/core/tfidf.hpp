#pragma once

#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/ranking.hpp"

namespace rwpattern {

/// count(t,d) / total_terms(d). Throws EMPTY_DOCUMENT when d has no terms.
double term_frequency(int32_t term, const Document& doc);

/// ln(N / (1 + df(t))). Finite for df = 0 and negative once dfreaches N.
double inverse_document_frequency(int64_t document_frequency, size_t corpus_size);
double inverse_document_frequency(const TermMatrix& matrix, int32_t term);

/// Score every vocabulary feature by tf(t, target) * idf(t, D), where the
/// target is the concatenation (counts summed) of the named documents, and
/// assign dense ranks over the whole vocabulary.
RankedFeatureList tfidf_rank(const TermMatrix& matrix, const std::vector<std::string>& target_doc_ids);

}  // namespace rwpattern
