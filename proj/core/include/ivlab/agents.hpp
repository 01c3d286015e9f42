#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ivlab/answer.hpp"
#include "ivlab/panel.hpp"
#include "ivlab/preselect.hpp"
#include "ivlab/prompts.hpp"
#include "ivlab/provider.hpp"
#include "ivlab/query.hpp"

namespace ivlab {

enum class Provenance { Generated, Injected };

const char* to_string(Provenance p) noexcept;

struct CandidateInstrument {
  std::string text;
  Verdict exclusion = Verdict::Unevaluated;
  Verdict independence = Verdict::Unevaluated;
  std::optional<std::string> proxy;
  Provenance provenance = Provenance::Generated;
  std::string exclusion_rationale;
  std::string independence_rationale;

  bool passes() const { return exclusion == Verdict::Valid && independence == Verdict::Valid; }
};

enum class Direction { ACausesB, BCausesA, Bidirectional, NoLink };

const char* to_string(Direction d) noexcept;

struct DirectionJudgment {
  Direction verdict = Direction::NoLink;
  std::string rationale;

  bool directional() const { return verdict == Direction::ACausesB || verdict == Direction::BCausesA; }
};

/// One agent decision, kept for the report.
struct AgentEvent {
  std::string agent;    // human_proxy, causal_oracle, grounder, ...
  std::string subject;  // what was judged
  std::string decision;
  std::string rationale;
};

struct AgentTrace {
  std::vector<AgentEvent> events;
  std::vector<std::string> diagnostics;
};

struct AgentSettings {
  DecodingOptions decoding;
  std::size_t shortlist = 5;     // grounder candidates when embeddings are available
  std::size_t lexical_cap = 50;  // grounder candidates without embeddings
};

/// LLM-facing agents over one provider. Every templated call gets one
/// re-prompt (format_retry) when the reply cannot be parsed; a second
/// failure raises ParseError carrying the raw reply.
class AgentRunner {
 public:
  AgentRunner(Provider& provider, TemplateSet templates, AgentSettings settings = {});

  /// Exactly `i` distinct instrument texts. `avoid` lists previously rejected
  /// proposals, appended to the context.
  std::vector<std::string> propose_instruments(const CausalQuery& q, std::size_t i,
                                               const std::vector<std::string>& avoid = {});
  std::vector<std::string> propose_confounders(const CausalQuery& q, std::size_t j);

  Verdict critique_exclusion(const std::string& z, const CausalQuery& q, std::string* rationale = nullptr);
  Verdict critique_independence(const std::string& z, const std::vector<std::string>& confounders,
                                const CausalQuery& q, std::string* rationale = nullptr);
  /// Sets both verdicts of `c`.
  void critique(CandidateInstrument& c, const std::vector<std::string>& confounders, const CausalQuery& q);

  /// Pairs the provider keeps, in input order. `vocab` supplies descriptions.
  std::vector<PairCandidate> human_proxy_select(const std::vector<PairCandidate>& pairs,
                                                const std::vector<VariableMeta>& vocab);
  DirectionJudgment causal_direction(const PairCandidate& pair);

  /// Dataset variable standing in for `z`, or nullopt when the provider says none.
  std::optional<std::string> ground_instrument(const std::string& z, const std::vector<VariableMeta>& vocab);

  /// Renders `template_name`, asks, and parses an integer in [lo, hi].
  int ask_choice(const std::string& template_name, const std::map<std::string, std::string>& values, int lo,
                 int hi, std::string* rationale = nullptr);

  Provider& provider() { return provider_; }
  const TemplateSet& templates() const { return templates_; }
  const AgentSettings& settings() const { return settings_; }
  AgentTrace& trace() { return trace_; }

 private:
  /// Calls the provider and applies `parse` to the reply, re-prompting once.
  void ask(const std::string& prompt, const std::function<void(const AnswerParts&)>& parse,
           std::string* rationale);
  std::vector<std::string> ask_list(const std::string& template_name,
                                    const std::map<std::string, std::string>& values, std::size_t count);
  Verdict ask_verdict(const std::string& template_name, const std::map<std::string, std::string>& values,
                      std::string* rationale);
  const std::vector<double>& embedding(const std::string& text);
  std::vector<const VariableMeta*> shortlist(const std::string& z, const std::vector<VariableMeta>& vocab);

  Provider& provider_;
  TemplateSet templates_;
  AgentSettings settings_;
  AgentTrace trace_;
  std::map<std::string, std::vector<double>> embedding_cache_;
};

/// Candidates whose exclusion and independence verdicts are both Valid, in
/// input order. Throws State when any verdict is still Unevaluated.
std::vector<CandidateInstrument> filter_valid(const std::vector<CandidateInstrument>& candidates);

/// Inserts `z_minus` (provenance Injected) at a position drawn from `seed`.
std::vector<CandidateInstrument> inject_flawed(std::vector<CandidateInstrument> candidates,
                                               const std::string& z_minus, std::uint64_t seed);

}  // namespace ivlab
