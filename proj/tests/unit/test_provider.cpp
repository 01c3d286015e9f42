#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "fixtures.hpp"
#include "ivlab/provider.hpp"

using namespace ivlab;
using nlohmann::json;

namespace {

using Rule = ScriptedProvider::Rule;

/// Local OpenAI-compatible stub that fails the first `failures` requests with 503.
class StubServer {
 public:
  explicit StubServer(int failures) : failures_(failures) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      if (hits <= failures_) {
        res.status = 503;
        return;
      }
      last_auth = req.get_header_value("Authorization");
      const auto body = json::parse(req.body);
      const std::string prompt = body.at("messages").at(0).at("content");
      json reply{{"choices", json::array({json{{"message", {{"role", "assistant"}, {"content", "echo: " + prompt}}}}})}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/v1/embeddings", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"data":[{"embedding":[0.6,0.8]}]})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  std::atomic<int> hits{0};
  std::string last_auth;

 private:
  httplib::Server server_;
  int failures_;
  int port_ = 0;
  std::thread thread_;
};

HttpSettings stub_settings(const StubServer& s, int retries) {
  HttpSettings h;
  h.endpoint = s.endpoint();
  h.model = "stub";
  h.max_retries = retries;
  h.backoff_seconds = 0.0;
  h.timeout_seconds = 5;
  h.api_key_env = "IVLAB_UNIT_TEST_KEY";
  return h;
}

}  // namespace

TEST(Scripted, MatchModesInOrder) {
  ScriptedProvider p({{Rule::Match::Exact, "ping", "pong"},
                      {Rule::Match::Regex, "^num[0-9]+$", "digits"},
                      {Rule::Match::Contains, "needle", "found"},
                      {Rule::Match::Contains, "needle in", "shadowed"}});
  EXPECT_EQ(p.complete("ping", {}), "pong");
  EXPECT_EQ(p.complete("num42", {}), "digits");
  EXPECT_EQ(p.complete("a needle in a haystack", {}), "found");
  EXPECT_IVLAB_ERROR(p.complete("ping!", {}), ErrorCode::TranscriptMismatch);
  EXPECT_EQ(p.calls(), 4u);
  EXPECT_FALSE(p.can_embed());
  EXPECT_IVLAB_ERROR(p.embed("x"), ErrorCode::Capability);
}

TEST(Scripted, FromJsonWithTable) {
  auto p = ScriptedProvider::from_json_text(
      R"({"rules": [{"match": "exact", "pattern": "a", "response": "b"}],
          "embedder": "table", "embeddings": {"x": [1, 0], "y": [0, 1]}})");
  EXPECT_EQ(p->complete("a", {}), "b");
  EXPECT_EQ(cosine_similarity(p->embed("x"), p->embed("y")), 0.0);
  EXPECT_IVLAB_ERROR(p->embed("z"), ErrorCode::TranscriptMismatch);
  EXPECT_IVLAB_ERROR(ScriptedProvider::from_json_text("{\"rules\": [{\"match\": \"fuzzy\"}]}"), ErrorCode::Parse);
}

TEST(Embedding, LexicalAndCosine) {
  const auto a = lexical_embedding("compulsory schooling laws");
  EXPECT_NEAR(cosine_similarity(a, lexical_embedding("Compulsory  schooling laws")), 1.0, 1e-6);
  const double partial = cosine_similarity(a, lexical_embedding("schooling laws by state"));
  EXPECT_GT(partial, 0.0);
  EXPECT_LT(partial, 1.0);
  EXPECT_EQ(cosine_similarity(a, lexical_embedding("!!!")), 0.0);
  EXPECT_IVLAB_ERROR(cosine_similarity({1.0}, {1.0, 0.0}), ErrorCode::Domain);
}

TEST(Transcript, RecordThenReplay) {
  auto dir = fixture::scratch_dir("transcript");
  const std::string path = (dir / "run.jsonl").string();
  ScriptedProvider inner({{Rule::Match::Contains, "first", "one"}, {Rule::Match::Contains, "second", "two"}},
                         ScriptedProvider::Embedder::Lexical);
  {
    RecordingProvider rec(inner, path);
    EXPECT_EQ(rec.complete("first prompt", {}), "one");
    EXPECT_EQ(rec.complete("second prompt", {}), "two");
    rec.embed("hello world");
  }
  std::ifstream in(path);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    auto rec = json::parse(line);
    for (const char* key : {"kind", "prompt_hash", "prompt", "timestamp"}) EXPECT_TRUE(rec.contains(key)) << key;
    ++lines;
  }
  EXPECT_EQ(lines, 3u);

  ReplayProvider replay(path);
  EXPECT_EQ(replay.complete("second prompt", {}), "two");
  EXPECT_EQ(replay.complete("first prompt", {}), "one");
  EXPECT_EQ(replay.complete("first prompt", {}), "one");
  EXPECT_EQ(replay.embed("hello world"), lexical_embedding("hello world"));
  EXPECT_IVLAB_ERROR(replay.complete("third prompt", {}), ErrorCode::TranscriptMismatch);
}

TEST(Transcript, PromptHashSeparatesKinds) {
  EXPECT_EQ(prompt_hash("complete", "x"), prompt_hash("complete", "x"));
  EXPECT_NE(prompt_hash("complete", "x"), prompt_hash("embed", "x"));
  EXPECT_EQ(prompt_hash("complete", "x").size(), 16u);
}

TEST(Http, CompletesAndEmbeds) {
  StubServer server(0);
  ::setenv("IVLAB_UNIT_TEST_KEY", "secret", 1);
  auto settings = stub_settings(server, 0);
  settings.embedding_model = "stub-embed";
  HttpProvider p(settings);
  EXPECT_EQ(p.complete("hello", {}), "echo: hello");
  EXPECT_EQ(server.last_auth, "Bearer secret");
  EXPECT_TRUE(p.can_embed());
  EXPECT_EQ(p.embed("x"), (std::vector<double>{0.6, 0.8}));
  ::unsetenv("IVLAB_UNIT_TEST_KEY");
}

TEST(Http, RetriesServerErrors) {
  StubServer server(2);
  HttpProvider p(stub_settings(server, 3));
  EXPECT_EQ(p.complete("again", {}), "echo: again");
  EXPECT_EQ(server.hits.load(), 3);
}

TEST(Http, ReportsRetryCount) {
  StubServer server(100);
  HttpProvider p(stub_settings(server, 2));
  try {
    p.complete("x", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Transport);
    EXPECT_NE(std::string(e.what()).find("after 2 retries"), std::string::npos) << e.what();
  }
  EXPECT_EQ(server.hits.load(), 3);
}

TEST(Http, UnreachableEndpoint) {
  HttpSettings h;
  h.endpoint = "http://127.0.0.1:1/v1";
  h.model = "m";
  h.max_retries = 1;
  h.backoff_seconds = 0.0;
  h.timeout_seconds = 1;
  HttpProvider p(h);
  EXPECT_IVLAB_ERROR(p.complete("x", {}), ErrorCode::Transport);
  h.model.clear();
  EXPECT_IVLAB_ERROR(HttpProvider{h}, ErrorCode::Config);
}

TEST(Stack, BuildsFromSettings) {
  auto dir = fixture::scratch_dir("stack");
  {
    std::ofstream(dir / "script.json") << R"({"rules": [{"match": "contains", "pattern": "", "response": "ok"}]})";
  }
  ProviderSettings s;
  s.kind = "scripted";
  s.script = (dir / "script.json").string();
  s.record = (dir / "rec.jsonl").string();
  ProviderStack stack(s);
  EXPECT_EQ(stack.provider().complete("anything", {}), "ok");
  EXPECT_TRUE(std::filesystem::exists(s.record));

  ProviderSettings bad;
  bad.kind = "telepathy";
  EXPECT_IVLAB_ERROR(ProviderStack{bad}, ErrorCode::Config);
}
