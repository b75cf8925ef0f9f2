#pragma once

#include <stdexcept>
#include <string>

namespace rwpattern {

enum class Errc {
  ok = 0,
  io,
  malformed_report,
  empty_report,
  malformed_artifact,
  empty_corpus,
  empty_document,
  unknown_document_id,
  single_class_corpus,
  dimension_mismatch,
  degenerate_classes,
  singular_projection,
  all_features_pruned,
  vocabulary_mismatch,
  index_out_of_range,
  empty_evaluation,
  unknown_fixture,
  invalid_argument,
  internal,
};

constexpr const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ok: return "OK";
    case Errc::io: return "IO";
    case Errc::malformed_report: return "MALFORMED_REPORT";
    case Errc::empty_report: return "EMPTY_REPORT";
    case Errc::malformed_artifact: return "MALFORMED_ARTIFACT";
    case Errc::empty_corpus: return "EMPTY_CORPUS";
    case Errc::empty_document: return "EMPTY_DOCUMENT";
    case Errc::unknown_document_id: return "UNKNOWN_DOCUMENT_ID";
    case Errc::single_class_corpus: return "SINGLE_CLASS_CORPUS";
    case Errc::dimension_mismatch: return "DIMENSION_MISMATCH";
    case Errc::degenerate_classes: return "DEGENERATE_CLASSES";
    case Errc::singular_projection: return "SINGULAR_PROJECTION";
    case Errc::all_features_pruned: return "ALL_FEATURES_PRUNED";
    case Errc::vocabulary_mismatch: return "VOCABULARY_MISMATCH";
    case Errc::index_out_of_range: return "INDEX_OUT_OF_RANGE";
    case Errc::empty_evaluation: return "EMPTY_EVALUATION";
    case Errc::unknown_fixture: return "UNKNOWN_FIXTURE";
    case Errc::invalid_argument: return "INVALID_ARGUMENT";
    case Errc::internal: return "INTERNAL";
  }
  return "UNKNOWN";
}

/// Domain error carrying a stable code. I/O failures use Errc::io; everything
/// else maps to a domain condition named in the public header.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace rwpattern
