#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ivlab/recovery.hpp"

using namespace ivlab;

namespace {

using Rule = ScriptedProvider::Rule;

Rule contains(std::string pattern, std::string response) {
  return {Rule::Match::Contains, std::move(pattern), std::move(response)};
}

const CausalQuery kEdu{"education", "wages", "US labor market"};

}  // namespace

TEST(Recovery, ExactMatch) {
  ScriptedProvider lexical({}, ScriptedProvider::Embedder::Lexical);
  EXPECT_NEAR(exact_match("quarter of birth", "quarter of birth", lexical), 1.0, 1e-6);
  ScriptedProvider table({}, ScriptedProvider::Embedder::Table, {{"a", {1.0, 0.0}}, {"b", {0.0, 1.0}}});
  EXPECT_EQ(exact_match("a", "b", table), 0.0);
  ScriptedProvider none({});
  EXPECT_IVLAB_ERROR(exact_match("a", "b", none), ErrorCode::Capability);
}

TEST(Recovery, ParaphraseScoresStrictlyBetween) {
  ScriptedProvider lexical({}, ScriptedProvider::Embedder::Lexical);
  const double em = exact_match("compulsory schooling age", "raised compulsory school-leaving age", lexical);
  EXPECT_GT(em, 0.0);
  EXPECT_LT(em, 1.0);
}

TEST(Recovery, ConceptualMatchRange) {
  ScriptedProvider ten({contains("", "Answer = [10]")});
  AgentRunner a(ten, TemplateSet::builtin());
  EXPECT_EQ(conceptual_match("x", "y", kEdu, a), 10);
  ScriptedProvider zero({contains("", "Answer = [0]")});
  AgentRunner b(zero, TemplateSet::builtin());
  EXPECT_IVLAB_ERROR(conceptual_match("x", "y", kEdu, b), ErrorCode::Parse);
}

TEST(Recovery, JudgeTranscriptRatesParaphraseHigh) {
  ScriptedProvider judge({contains("\"compulsory schooling age\" is conceptually similar", "Answer = [1]"),
                          contains("\"compulsory schooling age\" is to the accepted instrumental variable "
                                   "\"raised compulsory school-leaving age\"",
                                   "Both exploit the legal minimum leaving age.\nAnswer = [9]")});
  AgentRunner a(judge, TemplateSet::builtin());
  EXPECT_GE(conceptual_match("compulsory schooling age", "raised compulsory school-leaving age", kEdu, a), 8);
}

TEST(Recovery, ScoreUsesMaxRule) {
  const std::vector<std::string> sugg{"s1", "s2", "s3", "s4", "s5"};
  const std::vector<int> scores{3, 7, 9, 2, 5};
  std::vector<Rule> rules;
  for (std::size_t k = 0; k < sugg.size(); ++k) {
    rules.push_back(contains("\"" + sugg[k] + "\"", "Answer = [" + std::to_string(scores[k]) + "]"));
  }
  std::map<std::string, std::vector<double>> table{
      {"s1", {1, 0, 0}}, {"s2", {0, 1, 0}}, {"s3", {0.6, 0.8, 0}}, {"s4", {0, 0, 1}}, {"s5", {-1, 0, 0}}, {"c", {1, 0, 0}}};
  ScriptedProvider p(rules, ScriptedProvider::Embedder::Table, table);
  AgentRunner agents(p, TemplateSet::builtin());
  BenchmarkEntry entry{kEdu, {"c"}, {}, ""};
  auto s = score_recovery(entry, sugg, agents);
  EXPECT_NEAR(s.cm, 0.9, 1e-12);
  EXPECT_EQ(s.cm_raw, 9);
  EXPECT_EQ(s.cm_suggestion, "s3");
  EXPECT_NEAR(s.em, 1.0, 1e-12);
  EXPECT_EQ(s.em_suggestion, "s1");

  // Permutation invariance and max-monotonicity.
  std::vector<std::string> reversed(sugg.rbegin(), sugg.rend());
  auto r = score_recovery(entry, reversed, agents);
  EXPECT_EQ(r.cm, s.cm);
  EXPECT_EQ(r.em, s.em);
  auto fewer = score_recovery(entry, {"s4", "s5"}, agents);
  EXPECT_LE(fewer.cm, s.cm);
  EXPECT_LE(fewer.em, s.em);
  EXPECT_EQ(fewer.em, 0.0);  // cosine 0 and -1, clamped
  EXPECT_EQ(fewer.em_raw, 0.0);
}

TEST(Recovery, OrthogonalEmbeddingsScoreZero) {
  ScriptedProvider p({contains("", "Answer = [1]")}, ScriptedProvider::Embedder::Table,
                     {{"x", {1, 0}}, {"canon", {0, 1}}});
  AgentRunner agents(p, TemplateSet::builtin());
  auto s = score_recovery({kEdu, {"canon"}, {}, ""}, {"x"}, agents);
  EXPECT_EQ(s.em, 0.0);
  EXPECT_NEAR(s.cm, 0.1, 1e-12);
}

TEST(Recovery, FlawedFlags) {
  BenchmarkEntry entry{{"GDP", "Conflict", ""}, {}, {"Rainfall"}, ""};
  ScriptedProvider lexical({}, ScriptedProvider::Embedder::Lexical);

  auto candidate = [](std::string text, Verdict ex, Provenance prov) {
    CandidateInstrument c;
    c.text = std::move(text);
    c.exclusion = ex;
    c.independence = Verdict::Valid;
    c.provenance = prov;
    return c;
  };
  std::vector<CandidateInstrument> rejected{candidate("tariffs", Verdict::Valid, Provenance::Generated),
                                            candidate("Rainfall", Verdict::Invalid, Provenance::Injected)};
  auto hit = score_flawed(entry, {"rainfall", "tariffs"}, rejected, lexical);
  EXPECT_TRUE(hit.hg_flag);
  EXPECT_TRUE(hit.critic_flag);
  EXPECT_EQ(hit.matched_suggestion, "rainfall");

  std::vector<CandidateInstrument> passed{candidate("tariffs", Verdict::Valid, Provenance::Generated),
                                          candidate("Rainfall", Verdict::Valid, Provenance::Injected)};
  auto miss = score_flawed(entry, {"tariffs", "port access"}, passed, lexical);
  EXPECT_FALSE(miss.hg_flag);
  EXPECT_FALSE(miss.critic_flag);

  ScriptedProvider none({});
  EXPECT_TRUE(score_flawed(entry, {" RAINFALL "}, passed, none).hg_flag);
}

TEST(Recovery, LoadsBenchmarkFiles) {
  auto rec = load_benchmark(fixture::data_path("benchmarks/recovery.json"));
  ASSERT_EQ(rec.size(), 5u);
  EXPECT_EQ(rec[1].query.treatment, "education");
  auto flawed = load_benchmark(fixture::data_path("benchmarks/flawed.json"));
  ASSERT_EQ(flawed.size(), 5u);
  for (const auto& e : flawed) EXPECT_FALSE(e.flawed_ivs.empty());
  EXPECT_IVLAB_ERROR(parse_benchmark(R"({"entries": [{"treatment": "a", "outcome": "b"}]})"), ErrorCode::Schema);
  EXPECT_IVLAB_ERROR(parse_benchmark("not json"), ErrorCode::Parse);
}
