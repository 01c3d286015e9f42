#include "ivlab/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ivlab/error.hpp"

namespace ivlab {

namespace detail {
const std::map<std::string, std::string>& builtin_prompt_texts();
}

namespace {

// Length of a {Name} token starting at text[pos], or 0 when it is not one.
std::size_t placeholder_length(const std::string& text, std::size_t pos) {
  if (text[pos] != '{') return 0;
  std::size_t end = pos + 1;
  while (end < text.size() && (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_')) ++end;
  if (end == pos + 1 || end >= text.size() || text[end] != '}') return 0;
  if (!std::isalpha(static_cast<unsigned char>(text[pos + 1]))) return 0;
  return end - pos + 1;
}

}  // namespace

TemplateSet TemplateSet::builtin() {
  TemplateSet set;
  for (const auto& [name, text] : detail::builtin_prompt_texts()) set.texts_[name] = text;
  return set;
}

TemplateSet TemplateSet::from_directory(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) throw Error(ErrorCode::Io, "prompt directory '" + directory + "' not found");
  TemplateSet set = builtin();
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::ostringstream buf;
    buf << in.rdbuf();
    set.texts_[entry.path().stem().string()] = buf.str();
  }
  return set;
}

const std::string& TemplateSet::text(const std::string& name) const {
  auto it = texts_.find(name);
  if (it == texts_.end()) throw Error(ErrorCode::Lookup, "no prompt template named '" + name + "'");
  return it->second;
}

std::vector<std::string> TemplateSet::names() const {
  std::vector<std::string> out;
  for (const auto& [name, unused] : texts_) out.push_back(name);
  return out;
}

std::vector<std::string> placeholders(const std::string& text) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (auto len = placeholder_length(text, i)) {
      std::string name = text.substr(i + 1, len - 2);
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
      i += len - 1;
    }
  }
  return out;
}

std::string TemplateSet::render(const std::string& name, const std::map<std::string, std::string>& values) const {
  const std::string& tmpl = text(name);
  std::string out;
  out.reserve(tmpl.size() * 2);
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (auto len = placeholder_length(tmpl, i)) {
      const std::string key = tmpl.substr(i + 1, len - 2);
      auto it = values.find(key);
      if (it == values.end()) {
        throw Error(ErrorCode::State, "template '" + name + "' needs a value for {" + key + "}");
      }
      out += it->second;
      i += len - 1;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

}  // namespace ivlab
