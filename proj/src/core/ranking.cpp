#include "core/ranking.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "core/errors.hpp"

namespace rwpattern {

const char* rank_method_name(RankMethod m) {
  switch (m) {
    case RankMethod::tfidf: return "tfidf";
    case RankMethod::lda: return "lda";
    case RankMethod::et: return "et";
  }
  return "?";
}

const RankedFeature* RankedFeatureList::find(std::string_view feature) const {
  for (const auto& e : entries)
    if (e.feature == feature) return &e;
  return nullptr;
}

void sort_and_rank(std::vector<RankedFeature>& entries) {
  std::vector<size_t> order(entries.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (entries[a].na != entries[b].na) return !entries[a].na;
    if (entries[a].na) return a < b;
    if (entries[a].score != entries[b].score) return entries[a].score > entries[b].score;
    return a < b;
  });

  std::vector<RankedFeature> sorted;
  sorted.reserve(entries.size());
  for (size_t idx : order) sorted.push_back(std::move(entries[idx]));
  entries = std::move(sorted);

  int rank = 0;
  double prev = 0.0;
  bool first = true;
  for (auto& e : entries) {
    if (e.na) {
      e.rank = 0;
      continue;
    }
    if (first || e.score != prev) {
      ++rank;
      prev = e.score;
      first = false;
    }
    e.rank = rank;
  }
}

std::string format_double(double value) {
  char buf[40];
  int n = std::snprintf(buf, sizeof buf, "%.17g", value);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == value) {
    // try shorter forms that still round-trip
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[40];
      std::snprintf(shorter, sizeof shorter, "%.*g", prec, value);
      std::sscanf(shorter, "%lf", &back);
      if (back == value) return shorter;
    }
  }
  return std::string(buf, static_cast<size_t>(n));
}

void save_ranking(const RankedFeatureList& list, std::ostream& out) {
  out << "method," << rank_method_name(list.method) << "\n";
  out << "rank,score,feature\n";
  for (const auto& e : list.entries) {
    if (e.na)
      out << "NA,NA," << e.feature << "\n";
    else
      out << e.rank << ',' << format_double(e.score) << ',' << e.feature << "\n";
  }
}

void save_ranking_file(const RankedFeatureList& list, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, "cannot open for write: " + path);
  save_ranking(list, out);
  if (!out) fail(Errc::io, "write failed: " + path);
}

RankedFeatureList load_ranking(std::istream& in) {
  RankedFeatureList list;
  std::string line;
  if (!std::getline(in, line) || line.rfind("method,", 0) != 0)
    fail(Errc::malformed_artifact, "ranking file missing method header");
  std::string method = line.substr(7);
  if (method == "tfidf")
    list.method = RankMethod::tfidf;
  else if (method == "lda")
    list.method = RankMethod::lda;
  else if (method == "et")
    list.method = RankMethod::et;
  else
    fail(Errc::malformed_artifact, "unknown ranking method: " + method);
  if (!std::getline(in, line) || line != "rank,score,feature")
    fail(Errc::malformed_artifact, "ranking file missing column header");

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t c1 = line.find(',');
    size_t c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      fail(Errc::malformed_artifact, "bad ranking row: " + line);
    RankedFeature e;
    std::string rank_s = line.substr(0, c1);
    std::string score_s = line.substr(c1 + 1, c2 - c1 - 1);
    e.feature = line.substr(c2 + 1);
    if (rank_s == "NA") {
      e.na = true;
    } else {
      auto [p, ec] = std::from_chars(rank_s.data(), rank_s.data() + rank_s.size(), e.rank);
      if (ec != std::errc{} || p != rank_s.data() + rank_s.size())
        fail(Errc::malformed_artifact, "bad rank: " + rank_s);
      if (std::sscanf(score_s.c_str(), "%lf", &e.score) != 1)
        fail(Errc::malformed_artifact, "bad score: " + score_s);
    }
    list.entries.push_back(std::move(e));
  }
  return list;
}

RankedFeatureList load_ranking_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path);
  return load_ranking(in);
}

}  // namespace rwpattern
