#include "ivlab/provider.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <regex>
#include <sstream>
#include <thread>

#include "ivlab/error.hpp"
#include "text_util.hpp"

namespace ivlab {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string excerpt(const std::string& text) {
  std::string s = text.substr(0, 120);
  for (auto& c : s) {
    if (c == '\n') c = ' ';
  }
  return text.size() > 120 ? s + "..." : s;
}

}  // namespace

std::vector<double> Provider::embed(const std::string&) {
  throw Error(ErrorCode::Capability, "provider '" + identity() + "' cannot embed text");
}

std::string prompt_hash(const std::string& kind, const std::string& text) {
  return detail::hex64(detail::fnv1a64(kind + '\n' + text));
}

std::vector<double> lexical_embedding(const std::string& text, std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::Domain, "embedding dimension must be positive");
  std::vector<double> v(dim, 0.0);
  for (const auto& token : detail::word_tokens(text)) v[detail::fnv1a64(token) % dim] += 1.0;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
  }
  return v;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::Domain, "embedding dimensions differ");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

// ScriptedProvider

ScriptedProvider::ScriptedProvider(std::vector<Rule> rules, Embedder embedder,
                                   std::map<std::string, std::vector<double>> embeddings)
    : rules_(std::move(rules)), embedder_(embedder), embeddings_(std::move(embeddings)) {}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_file(const std::string& path) {
  auto p = from_json_text(read_file(path), std::filesystem::path(path).filename().string());
  return p;
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_json_text(const std::string& text, std::string label) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, "script '" + label + "' is not valid JSON: " + e.what());
  }
  std::vector<Rule> rules;
  std::map<std::string, std::vector<double>> table;
  std::string kind;
  try {
    const json rule_list = doc.value("rules", json::array());
    for (const auto& r : rule_list) {
      Rule rule;
      const std::string match = r.value("match", "contains");
      if (match == "exact") {
        rule.match = Rule::Match::Exact;
      } else if (match == "regex") {
        rule.match = Rule::Match::Regex;
      } else if (match == "contains") {
        rule.match = Rule::Match::Contains;
      } else {
        throw Error(ErrorCode::Parse, "script '" + label + "': unknown match kind '" + match + "'");
      }
      if (!r.contains("pattern") || !r.contains("response")) {
        throw Error(ErrorCode::Parse, "script '" + label + "': every rule needs pattern and response");
      }
      rule.pattern = r.at("pattern").get<std::string>();
      rule.response = r.at("response").get<std::string>();
      rules.push_back(std::move(rule));
    }
    kind = doc.value("embedder", "none");
    const json entries = doc.value("embeddings", json::object());
    for (const auto& [key, vec] : entries.items()) table[key] = vec.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, "script '" + label + "' is malformed: " + e.what());
  }
  Embedder embedder = Embedder::None;
  if (kind == "lexical") {
    embedder = Embedder::Lexical;
  } else if (kind == "table") {
    embedder = Embedder::Table;
  } else if (kind != "none") {
    throw Error(ErrorCode::Parse, "script '" + label + "': unknown embedder '" + kind + "'");
  }
  auto p = std::make_unique<ScriptedProvider>(std::move(rules), embedder, std::move(table));
  p->label_ = std::move(label);
  return p;
}

std::string ScriptedProvider::complete(const std::string& prompt, const DecodingOptions&) {
  std::lock_guard lock(mutex_);
  ++calls_;
  for (const auto& rule : rules_) {
    bool hit = false;
    switch (rule.match) {
      case Rule::Match::Exact: hit = prompt == rule.pattern; break;
      case Rule::Match::Contains: hit = prompt.find(rule.pattern) != std::string::npos; break;
      case Rule::Match::Regex: hit = std::regex_search(prompt, std::regex(rule.pattern)); break;
    }
    if (hit) return rule.response;
  }
  throw Error(ErrorCode::TranscriptMismatch, "no scripted rule matches prompt '" + excerpt(prompt) + "'");
}

std::vector<double> ScriptedProvider::embed(const std::string& text) {
  if (embedder_ == Embedder::None) return Provider::embed(text);
  std::lock_guard lock(mutex_);
  ++calls_;
  auto it = embeddings_.find(text);
  if (it != embeddings_.end()) return it->second;
  if (embedder_ == Embedder::Lexical) return lexical_embedding(text);
  throw Error(ErrorCode::TranscriptMismatch, "no scripted embedding for '" + excerpt(text) + "'");
}

std::size_t ScriptedProvider::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

// RecordingProvider

RecordingProvider::RecordingProvider(Provider& inner, const std::string& path) : inner_(inner), path_(path) {
  std::ofstream probe(path_, std::ios::app);
  if (!probe) throw Error(ErrorCode::Io, "cannot write transcript '" + path_ + "'");
}

void RecordingProvider::append(const std::string& line) {
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  out << line << '\n';
}

std::string RecordingProvider::complete(const std::string& prompt, const DecodingOptions& options) {
  std::string response = inner_.complete(prompt, options);
  append(json{{"kind", "complete"},
              {"prompt_hash", prompt_hash("complete", prompt)},
              {"prompt", prompt},
              {"response", response},
              {"timestamp", utc_now()}}
             .dump());
  return response;
}

std::vector<double> RecordingProvider::embed(const std::string& text) {
  auto v = inner_.embed(text);
  append(json{{"kind", "embed"},
              {"prompt_hash", prompt_hash("embed", text)},
              {"prompt", text},
              {"embedding", v},
              {"timestamp", utc_now()}}
             .dump());
  return v;
}

// ReplayProvider

ReplayProvider::ReplayProvider(const std::string& path) : label_(std::filesystem::path(path).filename().string()) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open transcript '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    try {
      const json rec = json::parse(line);
      const std::string kind = rec.value("kind", "complete");
      const std::string prompt = rec.at("prompt").get<std::string>();
      if (kind == "embed") {
        embeddings_[prompt_hash("embed", prompt)].items.push_back(rec.at("embedding").get<std::vector<double>>());
      } else {
        completions_[prompt_hash("complete", prompt)].items.push_back(rec.at("response").get<std::string>());
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, "transcript '" + path + "' line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::string ReplayProvider::complete(const std::string& prompt, const DecodingOptions&) {
  std::lock_guard lock(mutex_);
  auto it = completions_.find(prompt_hash("complete", prompt));
  if (it == completions_.end()) {
    throw Error(ErrorCode::TranscriptMismatch, "prompt not in transcript: '" + excerpt(prompt) + "'");
  }
  auto& q = it->second;
  const std::string& out = q.items[std::min(q.next, q.items.size() - 1)];
  if (q.next < q.items.size()) ++q.next;
  return out;
}

std::vector<double> ReplayProvider::embed(const std::string& text) {
  std::lock_guard lock(mutex_);
  if (embeddings_.empty()) throw Error(ErrorCode::Capability, "transcript holds no embeddings");
  auto it = embeddings_.find(prompt_hash("embed", text));
  if (it == embeddings_.end()) {
    throw Error(ErrorCode::TranscriptMismatch, "embedding not in transcript: '" + excerpt(text) + "'");
  }
  auto& q = it->second;
  const auto& out = q.items[std::min(q.next, q.items.size() - 1)];
  if (q.next < q.items.size()) ++q.next;
  return out;
}

// RateLimiter

void RateLimiter::acquire() {
  if (rate_ <= 0.0) return;
  std::unique_lock lock(mutex_);
  const auto now = std::chrono::steady_clock::now();
  const auto slot = std::max(now, next_);
  next_ = slot + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                     std::chrono::duration<double>(1.0 / rate_));
  lock.unlock();
  std::this_thread::sleep_until(slot);
}

// ProviderStack

ProviderStack::ProviderStack(const ProviderSettings& settings) {
  if (settings.kind == "scripted") {
    if (settings.script.empty()) throw Error(ErrorCode::Config, "provider.script is required for kind 'scripted'");
    base_ = ScriptedProvider::from_file(settings.script);
  } else if (settings.kind == "replay") {
    if (settings.transcript.empty()) {
      throw Error(ErrorCode::Config, "provider.transcript is required for kind 'replay'");
    }
    base_ = std::make_unique<ReplayProvider>(settings.transcript);
  } else if (settings.kind == "http") {
    base_ = std::make_unique<HttpProvider>(settings.http);
  } else {
    throw Error(ErrorCode::Config, "provider.kind must be scripted, replay or http, got '" + settings.kind + "'");
  }
  if (!settings.record.empty()) recorder_ = std::make_unique<RecordingProvider>(*base_, settings.record);
}

}  // namespace ivlab
