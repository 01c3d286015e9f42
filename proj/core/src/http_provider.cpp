#include <httplib.h>

#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "ivlab/error.hpp"
#include "ivlab/provider.hpp"

namespace ivlab {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string base;    // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::Config, "endpoint '" + url + "' lacks a scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.base = url.substr(0, path_start);
  e.prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpProvider::HttpProvider(HttpSettings settings)
    : settings_(std::move(settings)), limiter_(settings_.requests_per_second) {
  if (settings_.model.empty()) throw Error(ErrorCode::Config, "provider.model is required for kind 'http'");
  split_endpoint(settings_.endpoint);
  if (const char* key = std::getenv(settings_.api_key_env.c_str())) api_key_ = key;
}

HttpProvider::~HttpProvider() = default;

std::string HttpProvider::identity() const { return "http:" + settings_.endpoint + "#" + settings_.model; }

std::string HttpProvider::post(const std::string& path, const std::string& body) {
  const Endpoint ep = split_endpoint(settings_.endpoint);
  httplib::Client client(ep.base);
  client.set_connection_timeout(settings_.timeout_seconds, 0);
  client.set_read_timeout(settings_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  std::string last_problem;
  for (int attempt = 0; attempt <= settings_.max_retries; ++attempt) {
    if (attempt > 0 && settings_.backoff_seconds > 0.0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(settings_.backoff_seconds * (1 << (attempt - 1))));
    }
    limiter_.acquire();
    auto res = client.Post(ep.prefix + path, headers, body, "application/json");
    if (!res) {
      last_problem = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    last_problem = "HTTP " + std::to_string(res->status);
    if (!retryable(res->status)) {
      throw Error(ErrorCode::Transport, last_problem + " from " + settings_.endpoint + path + " after " +
                                            std::to_string(attempt) + " retries");
    }
  }
  throw Error(ErrorCode::Transport, last_problem + " from " + settings_.endpoint + path + " after " +
                                        std::to_string(settings_.max_retries) + " retries");
}

std::string HttpProvider::complete(const std::string& prompt, const DecodingOptions& options) {
  const json request{{"model", settings_.model},
                     {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
                     {"temperature", options.temperature},
                     {"top_p", options.top_p},
                     {"max_tokens", options.max_tokens}};
  const std::string body = post("/chat/completions", request.dump());
  try {
    return json::parse(body).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Transport, std::string("malformed completion reply: ") + e.what());
  }
}

std::vector<double> HttpProvider::embed(const std::string& text) {
  if (!can_embed()) return Provider::embed(text);
  const json request{{"model", settings_.embedding_model}, {"input", text}};
  const std::string body = post("/embeddings", request.dump());
  try {
    return json::parse(body).at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Transport, std::string("malformed embedding reply: ") + e.what());
  }
}

}  // namespace ivlab
