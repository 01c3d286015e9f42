#pragma once

#include <string>
#include <vector>

#include "ivlab/error.hpp"

namespace ivlab {

/// Parse failure that keeps the offending provider reply.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string raw)
      : Error(ErrorCode::Parse, message), raw_(std::move(raw)) {}

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

enum class Verdict { Unevaluated, Valid, Invalid };

const char* to_string(Verdict v) noexcept;

/// Reply split at its last "Answer = [...]" marker.
struct AnswerParts {
  std::string body;       // text inside the brackets
  std::string rationale;  // text before the marker, trimmed
};

/// Finds the last case-insensitive `Answer = [...]` (or `Answer: [...]`).
/// A marker without brackets takes the rest of its line. Throws ParseError
/// when no marker is present.
AnswerParts split_answer(const std::string& text);

/// Comma-separated items: trimmed, quotes and list numbering stripped, empty
/// items dropped, case-insensitive duplicates removed (first spelling kept).
std::vector<std::string> parse_list(const std::string& text);

/// "Valid" / "Invalid", case-insensitive.
Verdict parse_verdict(const std::string& text);

/// Integer choice in [lo, hi].
int parse_choice(const std::string& text, int lo, int hi);

/// "Keep" -> true, "Drop" -> false.
bool parse_keep(const std::string& text);

}  // namespace ivlab
