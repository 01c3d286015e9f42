#pragma once

#include <string>
#include <vector>

#include "ivlab/agents.hpp"
#include "ivlab/provider.hpp"
#include "ivlab/query.hpp"

namespace ivlab {

struct BenchmarkEntry {
  CausalQuery query;
  std::vector<std::string> canonical_ivs;
  std::vector<std::string> flawed_ivs;
  std::string source;  // literature reference for the instruments
};

/// Reads {"entries": [{"treatment", "outcome", "context", "canonical_ivs",
/// "flawed_ivs", "source"}]}. Every entry needs canonical or flawed IVs.
std::vector<BenchmarkEntry> load_benchmark(const std::string& path);
std::vector<BenchmarkEntry> parse_benchmark(const std::string& json_text);

/// Cosine similarity of the two embeddings; Capability without embeddings.
double exact_match(const std::string& suggestion, const std::string& canonical, Provider& p);

/// Judge score 1..10 from the conceptual_match template.
int conceptual_match(const std::string& suggestion, const std::string& canonical, const CausalQuery& q,
                     AgentRunner& agents);

struct RecoveryScore {
  double em = 0.0;      // max cosine, clamped at 0 for reporting
  double em_raw = 0.0;  // max cosine before clamping
  std::string em_suggestion;
  std::string em_canonical;
  double cm = 0.0;  // max judge score / 10
  int cm_raw = 0;
  std::string cm_suggestion;
  std::string cm_canonical;
};

/// Max-over-pairs EM and CM for one entry; ties keep the earliest pair.
RecoveryScore score_recovery(const BenchmarkEntry& entry, const std::vector<std::string>& suggestions,
                             AgentRunner& agents);

struct FlawedScore {
  bool hg_flag = false;      // generator proposed a flawed IV
  bool critic_flag = false;  // injected flawed IV rejected by the critics
  std::string matched_suggestion;
  std::string matched_flawed;
};

/// `critiqued` is the candidate list after injection and critique. A
/// suggestion matches a flawed IV when the normalized texts are equal or, with
/// an embedding provider, when exact_match >= threshold.
FlawedScore score_flawed(const BenchmarkEntry& entry, const std::vector<std::string>& suggestions,
                         const std::vector<CandidateInstrument>& critiqued, Provider& p, double threshold = 0.85);

}  // namespace ivlab
