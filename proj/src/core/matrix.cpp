#include "core/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "core/errors.hpp"

namespace rwpattern {

namespace {

std::string sanitize_id(std::string_view id) {
  std::string out(id);
  for (char& c : out)
    if (c == ',' || c == '\n' || c == '\r') c = '_';
  return out;
}

std::string escape_term(std::string_view term) {
  std::string out;
  out.reserve(term.size());
  for (char c : term) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_term(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      ++i;
      if (s[i] == 'n') out += '\n';
      else if (s[i] == 'r') out += '\r';
      else out += s[i];
    } else {
      out += s[i];
    }
  }
  return out;
}

int64_t parse_int(std::string_view s, const char* what) {
  int64_t value = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || p != s.data() + s.size())
    fail(Errc::malformed_artifact, std::string("bad ") + what + ": " + std::string(s));
  return value;
}

}  // namespace

const char* label_name(Label l) { return l == Label::infected ? "infected" : "normal"; }

Label parse_label(std::string_view s) {
  if (s == "infected") return Label::infected;
  if (s == "normal") return Label::normal;
  fail(Errc::malformed_artifact, "unknown label: " + std::string(s));
}

int32_t Document::count_of(int32_t term) const {
  auto it = std::lower_bound(counts.begin(), counts.end(), term,
                             [](const auto& p, int32_t t) { return p.first < t; });
  if (it != counts.end() && it->first == term) return it->second;
  return 0;
}

int32_t TermMatrix::find_term(std::string_view feature) const {
  for (size_t i = 0; i < vocabulary.size(); ++i)
    if (vocabulary[i] == feature) return static_cast<int32_t>(i);
  return -1;
}

int64_t TermMatrix::document_frequency(int32_t term) const {
  int64_t df = 0;
  for (const auto& d : documents)
    if (d.count_of(term) > 0) ++df;
  return df;
}

std::vector<double> TermMatrix::dense_row(size_t doc) const {
  if (doc >= documents.size()) fail(Errc::index_out_of_range, "document index out of range");
  std::vector<double> row(vocab_size(), 0.0);
  for (const auto& [term, count] : documents[doc].counts)
    row[static_cast<size_t>(term)] = static_cast<double>(count);
  return row;
}

bool TermMatrix::has_label(Label l) const {
  for (const auto& d : documents)
    if (d.label == l) return true;
  return false;
}

uint64_t hash_vocabulary(const std::vector<std::string>& vocabulary) {
  // FNV-1a over terms, newline-delimited; order-sensitive on purpose.
  uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](char c) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  };
  for (const auto& term : vocabulary) {
    for (char c : term) feed(c);
    feed('\n');
  }
  return h;
}

uint64_t TermMatrix::vocab_hash() const { return hash_vocabulary(vocabulary); }

void MatrixBuilder::add_document(std::string_view id, Label label,
                                 std::span<const EventRecord> events) {
  std::map<int32_t, int32_t> counts;
  for (const auto& ev : events) {
    std::string key = make_feature_key(ev, opts_);
    auto [it, inserted] = index_.try_emplace(key, static_cast<int32_t>(matrix_.vocabulary.size()));
    if (inserted) matrix_.vocabulary.push_back(std::move(key));
    counts[it->second] += 1;
  }
  Document doc;
  doc.id = sanitize_id(id);
  doc.label = label;
  doc.counts.reserve(counts.size());
  for (auto [term, count] : counts) {
    int32_t c = binary_ ? 1 : count;
    doc.counts.emplace_back(term, c);
    doc.total_terms += c;
  }
  matrix_.documents.push_back(std::move(doc));
}

TermMatrix MatrixBuilder::build() {
  if (matrix_.documents.empty()) fail(Errc::empty_corpus, "no documents added");
  index_.clear();
  return std::move(matrix_);
}

std::vector<std::pair<size_t, size_t>> window_spans(size_t n_events, size_t width, size_t stride) {
  if (width < 1 || stride < 1) fail(Errc::invalid_argument, "width and stride must be >= 1");
  std::vector<std::pair<size_t, size_t>> spans;
  for (size_t start = 0; start < n_events; start += stride) {
    size_t end = std::min(start + width, n_events);
    spans.emplace_back(start, end);
    if (start + width >= n_events) break;  // this window reached the end
  }
  return spans;
}

TermMatrix restrict_vocabulary(const TermMatrix& matrix, const std::vector<char>& keep) {
  if (keep.size() != matrix.vocab_size())
    fail(Errc::invalid_argument, "keep mask size mismatch");
  std::vector<int32_t> remap(matrix.vocab_size(), -1);
  TermMatrix out;
  for (size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) {
      remap[i] = static_cast<int32_t>(out.vocabulary.size());
      out.vocabulary.push_back(matrix.vocabulary[i]);
    }
  }
  out.documents.reserve(matrix.documents.size());
  for (const auto& d : matrix.documents) {
    Document nd;
    nd.id = d.id;
    nd.label = d.label;
    for (const auto& [term, count] : d.counts) {
      int32_t t = remap[static_cast<size_t>(term)];
      if (t >= 0) {
        nd.counts.emplace_back(t, count);
        nd.total_terms += count;
      }
    }
    out.documents.push_back(std::move(nd));
  }
  return out;
}

TermMatrix prune(const TermMatrix& matrix, const RankedFeatureList& scores, double min_abs_score,
                 bool drop_zero_variance) {
  std::unordered_map<std::string_view, double> score_of;
  score_of.reserve(scores.entries.size());
  for (const auto& e : scores.entries) score_of.emplace(e.feature, e.na ? 0.0 : e.score);

  std::vector<char> keep(matrix.vocab_size(), 0);
  for (size_t i = 0; i < matrix.vocab_size(); ++i) {
    auto it = score_of.find(matrix.vocabulary[i]);
    if (it == score_of.end())
      fail(Errc::invalid_argument, "scores do not cover vocabulary: " + matrix.vocabulary[i]);
    keep[i] = std::abs(it->second) >= min_abs_score ? 1 : 0;
  }

  if (drop_zero_variance && !matrix.documents.empty()) {
    for (size_t i = 0; i < matrix.vocab_size(); ++i) {
      if (!keep[i]) continue;
      int32_t first = matrix.documents.front().count_of(static_cast<int32_t>(i));
      bool constant = true;
      for (const auto& d : matrix.documents) {
        if (d.count_of(static_cast<int32_t>(i)) != first) {
          constant = false;
          break;
        }
      }
      if (constant) keep[i] = 0;
    }
  }

  if (std::find(keep.begin(), keep.end(), 1) == keep.end())
    fail(Errc::all_features_pruned, "pruning removed every feature");
  return restrict_vocabulary(matrix, keep);
}

TermMatrix submatrix(const TermMatrix& matrix, const std::vector<size_t>& doc_indices) {
  TermMatrix out;
  out.vocabulary = matrix.vocabulary;
  out.documents.reserve(doc_indices.size());
  for (size_t idx : doc_indices) {
    if (idx >= matrix.documents.size()) fail(Errc::index_out_of_range, "document index out of range");
    out.documents.push_back(matrix.documents[idx]);
  }
  return out;
}

void save_matrix(const TermMatrix& matrix, std::ostream& out) {
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(matrix.vocab_hash()));
  out << "rwpattern.matrix.v1\n";
  out << "vocab_hash " << hash << "\n";
  out << "docs " << matrix.num_docs() << "\n";
  out << "terms " << matrix.vocab_size() << "\n";
  out << "vocab\n";
  for (const auto& term : matrix.vocabulary) out << escape_term(term) << "\n";
  out << "rows\n";
  for (const auto& d : matrix.documents) {
    out << d.id << ',' << label_name(d.label);
    for (const auto& [term, count] : d.counts) out << ',' << term << ':' << count;
    out << "\n";
  }
  out << "end\n";
}

void save_matrix_file(const TermMatrix& matrix, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, "cannot open for write: " + path);
  save_matrix(matrix, out);
  if (!out) fail(Errc::io, "write failed: " + path);
}

TermMatrix load_matrix(std::istream& in) {
  std::string line;
  auto need_line = [&](const char* what) -> std::string& {
    if (!std::getline(in, line)) fail(Errc::malformed_artifact, std::string("truncated matrix: ") + what);
    return line;
  };

  if (need_line("magic") != "rwpattern.matrix.v1")
    fail(Errc::malformed_artifact, "not a matrix artifact (bad magic)");
  if (need_line("vocab_hash").rfind("vocab_hash ", 0) != 0)
    fail(Errc::malformed_artifact, "missing vocab_hash");
  std::string stored_hash = line.substr(11);
  if (need_line("docs").rfind("docs ", 0) != 0) fail(Errc::malformed_artifact, "missing docs");
  int64_t n_docs = parse_int(std::string_view(line).substr(5), "doc count");
  if (need_line("terms").rfind("terms ", 0) != 0) fail(Errc::malformed_artifact, "missing terms");
  int64_t n_terms = parse_int(std::string_view(line).substr(6), "term count");
  if (need_line("vocab header") != "vocab") fail(Errc::malformed_artifact, "missing vocab section");

  TermMatrix matrix;
  matrix.vocabulary.reserve(static_cast<size_t>(n_terms));
  for (int64_t i = 0; i < n_terms; ++i) matrix.vocabulary.push_back(unescape_term(need_line("vocab entry")));
  if (need_line("rows header") != "rows") fail(Errc::malformed_artifact, "missing rows section");

  for (int64_t r = 0; r < n_docs; ++r) {
    std::string& row = need_line("row");
    size_t c1 = row.find(',');
    if (c1 == std::string::npos) fail(Errc::malformed_artifact, "bad row: " + row);
    size_t c2 = row.find(',', c1 + 1);
    Document doc;
    doc.id = row.substr(0, c1);
    doc.label = parse_label(row.substr(c1 + 1, (c2 == std::string::npos ? row.size() : c2) - c1 - 1));
    size_t pos = c2;
    while (pos != std::string::npos) {
      size_t next = row.find(',', pos + 1);
      std::string_view cell(row.data() + pos + 1,
                            (next == std::string::npos ? row.size() : next) - pos - 1);
      size_t colon = cell.find(':');
      if (colon == std::string_view::npos) fail(Errc::malformed_artifact, "bad cell in row: " + row);
      int64_t term = parse_int(cell.substr(0, colon), "term index");
      int64_t count = parse_int(cell.substr(colon + 1), "count");
      if (term < 0 || term >= n_terms) fail(Errc::malformed_artifact, "term index out of range");
      if (count < 0) fail(Errc::malformed_artifact, "negative count");
      doc.counts.emplace_back(static_cast<int32_t>(term), static_cast<int32_t>(count));
      doc.total_terms += count;
      pos = next;
    }
    if (!std::is_sorted(doc.counts.begin(), doc.counts.end()))
      fail(Errc::malformed_artifact, "row terms not sorted: " + doc.id);
    matrix.documents.push_back(std::move(doc));
  }
  if (need_line("end") != "end") fail(Errc::malformed_artifact, "missing end marker");

  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(matrix.vocab_hash()));
  if (stored_hash != hash) fail(Errc::malformed_artifact, "vocabulary hash mismatch");
  return matrix;
}

TermMatrix load_matrix_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path);
  return load_matrix(in);
}

}  // namespace rwpattern
