#include "ivlab/answer.hpp"

#include <cctype>
#include <charconv>
#include <set>

#include "text_util.hpp"

namespace ivlab {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Parses a marker whose "answer" keyword starts at `pos`; returns false when
// the keyword is not followed by '=' or ':'.
bool parse_marker_at(const std::string& text, std::size_t pos, AnswerParts& out) {
  std::size_t i = pos + 6;
  while (i < text.size() && is_space(text[i])) ++i;
  if (i >= text.size() || (text[i] != '=' && text[i] != ':')) return false;
  ++i;
  while (i < text.size() && is_space(text[i])) ++i;
  if (i < text.size() && text[i] == '[') {
    const std::size_t close = text.find(']', i + 1);
    if (close == std::string::npos) return false;
    out.body = std::string(detail::trim(std::string_view(text).substr(i + 1, close - i - 1)));
  } else {
    std::size_t eol = text.find('\n', i);
    if (eol == std::string::npos) eol = text.size();
    std::string_view rest = detail::trim(std::string_view(text).substr(i, eol - i));
    while (!rest.empty() && (rest.back() == '.' || rest.back() == '*')) rest.remove_suffix(1);
    if (rest.empty()) return false;
    out.body = std::string(rest);
  }
  out.rationale = std::string(detail::trim(std::string_view(text).substr(0, pos)));
  return true;
}

std::string strip_item(std::string_view s) {
  s = detail::trim(s);
  // "1." / "2)" style numbering
  std::size_t digits = 0;
  while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
  if (digits > 0 && digits + 1 < s.size() && (s[digits] == '.' || s[digits] == ')') && is_space(s[digits + 1])) {
    s = detail::trim(s.substr(digits + 1));
  }
  while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    s = detail::trim(s.substr(1, s.size() - 2));
  }
  while (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return std::string(detail::trim(s));
}

}  // namespace

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Valid: return "valid";
    case Verdict::Invalid: return "invalid";
    case Verdict::Unevaluated: return "unevaluated";
  }
  return "unevaluated";
}

AnswerParts split_answer(const std::string& text) {
  const std::string lower = detail::to_lower(text);
  std::size_t pos = lower.rfind("answer");
  while (pos != std::string::npos) {
    AnswerParts parts;
    if (parse_marker_at(text, pos, parts)) return parts;
    if (pos == 0) break;
    pos = lower.rfind("answer", pos - 1);
  }
  throw ParseError("reply has no 'Answer = [...]' marker", text);
}

std::vector<std::string> parse_list(const std::string& text) {
  std::vector<std::string> items;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    std::string item = strip_item(std::string_view(text).substr(start, comma - start));
    if (!item.empty() && seen.insert(detail::to_lower(item)).second) items.push_back(std::move(item));
    start = comma + 1;
  }
  return items;
}

Verdict parse_verdict(const std::string& text) {
  const std::string v = detail::to_lower(strip_item(text));
  if (v == "valid") return Verdict::Valid;
  if (v == "invalid") return Verdict::Invalid;
  throw ParseError("expected Valid or Invalid, got '" + text + "'", text);
}

int parse_choice(const std::string& text, int lo, int hi) {
  const std::string v = strip_item(text);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ParseError("expected an integer choice, got '" + text + "'", text);
  }
  if (value < lo || value > hi) {
    throw ParseError("choice " + std::to_string(value) + " outside " + std::to_string(lo) + ".." +
                         std::to_string(hi),
                     text);
  }
  return value;
}

bool parse_keep(const std::string& text) {
  const std::string v = detail::to_lower(strip_item(text));
  if (v == "keep") return true;
  if (v == "drop") return false;
  throw ParseError("expected Keep or Drop, got '" + text + "'", text);
}

}  // namespace ivlab
