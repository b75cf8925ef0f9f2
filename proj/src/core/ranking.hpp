#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rwpattern {

enum class RankMethod { tfidf, lda, et };

const char* rank_method_name(RankMethod m);

struct RankedFeature {
  std::string feature;
  double score = 0.0;
  int rank = 0;      // dense rank, 1-based; meaningless when na
  bool na = false;   // feature used in no tree (et only)
};

/// Features with scores and dense ranks for one method. Entries are sorted by
/// score descending; equal scores share a rank and the next distinct score
/// gets rank + 1. NA entries sort last and carry no rank.
struct RankedFeatureList {
  RankMethod method = RankMethod::tfidf;
  std::vector<RankedFeature> entries;

  const RankedFeature* find(std::string_view feature) const;
};

/// Sort entries (score descending, then original position for a stable
/// display order), push NA entries to the back, and assign dense ranks.
void sort_and_rank(std::vector<RankedFeature>& entries);

/// Delimited export, one `rank,score,feature` line per entry ("NA" literal
/// for both fields of NA entries). Feature text is last so commas inside it
/// survive a 3-field split.
void save_ranking(const RankedFeatureList& list, std::ostream& out);
void save_ranking_file(const RankedFeatureList& list, const std::string& path);
RankedFeatureList load_ranking(std::istream& in);
RankedFeatureList load_ranking_file(const std::string& path);

std::string format_double(double value);  // shortest exact round-trip form

}  // namespace rwpattern
