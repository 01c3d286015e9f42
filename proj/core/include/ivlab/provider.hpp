#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ivlab {

struct DecodingOptions {
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 1024;
};

/// Text completion plus optional embeddings. Implementations are thread-safe.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual std::string complete(const std::string& prompt, const DecodingOptions& options) = 0;
  virtual bool can_embed() const { return false; }
  /// Throws Capability unless can_embed().
  virtual std::vector<double> embed(const std::string& text);
  /// Stable description for run manifests.
  virtual std::string identity() const = 0;
};

/// Hashed bag-of-words vector, unit norm (all zeros for text without words).
std::vector<double> lexical_embedding(const std::string& text, std::size_t dim = 256);

/// Cosine similarity; Domain on length mismatch, 0 when either vector is zero.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// Offline provider driven by a JSON script:
///   {"rules": [{"match": "contains|exact|regex", "pattern": "...", "response": "..."}],
///    "embedder": "lexical|table|none", "embeddings": {"text": [..]}}
/// Rules are tried in order and the first match answers; no match raises
/// TranscriptMismatch. With "lexical", texts missing from the table fall back
/// to lexical_embedding.
class ScriptedProvider : public Provider {
 public:
  struct Rule {
    enum class Match { Exact, Contains, Regex } match = Match::Contains;
    std::string pattern;
    std::string response;
  };
  enum class Embedder { None, Lexical, Table };

  ScriptedProvider(std::vector<Rule> rules, Embedder embedder = Embedder::None,
                   std::map<std::string, std::vector<double>> embeddings = {});
  static std::unique_ptr<ScriptedProvider> from_file(const std::string& path);
  static std::unique_ptr<ScriptedProvider> from_json_text(const std::string& json, std::string label = "inline");

  std::string complete(const std::string& prompt, const DecodingOptions& options) override;
  bool can_embed() const override { return embedder_ != Embedder::None; }
  std::vector<double> embed(const std::string& text) override;
  std::string identity() const override { return "scripted:" + label_; }

  std::size_t calls() const;

 private:
  std::vector<Rule> rules_;
  Embedder embedder_;
  std::map<std::string, std::vector<double>> embeddings_;
  std::string label_ = "inline";
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

/// Forwards to another provider and appends one JSON line per call:
/// {"kind", "prompt_hash", "prompt", "response" | "embedding", "timestamp"}.
class RecordingProvider : public Provider {
 public:
  RecordingProvider(Provider& inner, const std::string& path);

  std::string complete(const std::string& prompt, const DecodingOptions& options) override;
  bool can_embed() const override { return inner_.can_embed(); }
  std::vector<double> embed(const std::string& text) override;
  std::string identity() const override { return inner_.identity(); }

 private:
  void append(const std::string& line);

  Provider& inner_;
  std::string path_;
  std::mutex mutex_;
};

/// Answers from a recorded transcript keyed by prompt hash. Repeated prompts
/// consume their records in order and then reuse the last one; an unknown
/// prompt raises TranscriptMismatch.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(const std::string& path);

  std::string complete(const std::string& prompt, const DecodingOptions& options) override;
  bool can_embed() const override { return !embeddings_.empty(); }
  std::vector<double> embed(const std::string& text) override;
  std::string identity() const override { return "replay:" + label_; }

 private:
  template <typename T>
  struct Queue {
    std::vector<T> items;
    std::size_t next = 0;
  };

  std::map<std::string, Queue<std::string>> completions_;
  std::map<std::string, Queue<std::vector<double>>> embeddings_;
  std::string label_;
  std::mutex mutex_;
};

/// Spaces calls at least 1 / rate seconds apart; rate <= 0 disables it.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second) : rate_(requests_per_second) {}
  void acquire();

 private:
  double rate_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point next_{};
};

struct HttpSettings {
  std::string endpoint = "https://api.openai.com/v1";  // OpenAI-compatible base URL
  std::string model;
  std::string embedding_model;  // empty disables embeddings
  std::string api_key_env = "IVLAB_API_KEY";
  double requests_per_second = 0.0;
  int max_retries = 3;
  double backoff_seconds = 1.0;
  int timeout_seconds = 60;
};

/// OpenAI-compatible chat-completions and embeddings client. Network failures,
/// 429 and 5xx replies are retried with exponential backoff; the final
/// Transport error reports the retry count.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpSettings settings);
  ~HttpProvider() override;

  std::string complete(const std::string& prompt, const DecodingOptions& options) override;
  bool can_embed() const override { return !settings_.embedding_model.empty(); }
  std::vector<double> embed(const std::string& text) override;
  std::string identity() const override;

 private:
  std::string post(const std::string& path, const std::string& body);

  HttpSettings settings_;
  std::string api_key_;
  RateLimiter limiter_;
};

struct ProviderSettings {
  std::string kind;        // scripted | replay | http
  std::string script;      // scripted: rule file
  std::string transcript;  // replay: transcript to read
  std::string record;      // any kind: transcript to append to
  HttpSettings http;
};

/// Provider stack described by settings, including the recorder when
/// `record` is set.
class ProviderStack {
 public:
  explicit ProviderStack(const ProviderSettings& settings);
  Provider& provider() { return recorder_ ? *recorder_ : *base_; }

 private:
  std::unique_ptr<Provider> base_;
  std::unique_ptr<RecordingProvider> recorder_;
};

/// Hash used to key transcript records.
std::string prompt_hash(const std::string& kind, const std::string& text);

}  // namespace ivlab
