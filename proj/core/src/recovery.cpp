#include "ivlab/recovery.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ivlab/error.hpp"
#include "text_util.hpp"

namespace ivlab {

using nlohmann::json;

std::vector<BenchmarkEntry> parse_benchmark(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("benchmark is not valid JSON: ") + e.what());
  }
  std::vector<BenchmarkEntry> entries;
  try {
    for (const auto& e : doc.at("entries")) {
      BenchmarkEntry entry;
      entry.query.treatment = e.at("treatment").get<std::string>();
      entry.query.outcome = e.at("outcome").get<std::string>();
      entry.query.context = e.value("context", "");
      entry.canonical_ivs = e.value("canonical_ivs", std::vector<std::string>{});
      entry.flawed_ivs = e.value("flawed_ivs", std::vector<std::string>{});
      entry.source = e.value("source", "");
      validate(entry.query);
      if (entry.canonical_ivs.empty() && entry.flawed_ivs.empty()) {
        throw Error(ErrorCode::Schema, "benchmark entry " + entry.query.treatment + " -> " + entry.query.outcome +
                                           " lists no instruments");
      }
      entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("malformed benchmark entry: ") + e.what());
  }
  return entries;
}

std::vector<BenchmarkEntry> load_benchmark(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open benchmark '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_benchmark(buf.str());
}

double exact_match(const std::string& suggestion, const std::string& canonical, Provider& p) {
  if (detail::trim(suggestion).empty() || detail::trim(canonical).empty()) {
    throw Error(ErrorCode::Domain, "exact match needs two nonempty texts");
  }
  if (!p.can_embed()) throw Error(ErrorCode::Capability, "exact match needs an embedding provider");
  return cosine_similarity(p.embed(suggestion), p.embed(canonical));
}

int conceptual_match(const std::string& suggestion, const std::string& canonical, const CausalQuery& q,
                     AgentRunner& agents) {
  if (detail::trim(suggestion).empty() || detail::trim(canonical).empty()) {
    throw Error(ErrorCode::Domain, "conceptual match needs two nonempty texts");
  }
  return agents.ask_choice("conceptual_match",
                           {{"T", q.treatment},
                            {"Y", q.outcome},
                            {"Context", q.context},
                            {"Suggestion", suggestion},
                            {"Canonical", canonical}},
                           1, 10);
}

RecoveryScore score_recovery(const BenchmarkEntry& entry, const std::vector<std::string>& suggestions,
                             AgentRunner& agents) {
  if (suggestions.empty()) throw Error(ErrorCode::Domain, "recovery scoring needs at least one suggestion");
  if (entry.canonical_ivs.empty()) throw Error(ErrorCode::Domain, "recovery entry has no canonical instruments");
  RecoveryScore s;
  bool first = true;
  for (const auto& sug : suggestions) {
    for (const auto& can : entry.canonical_ivs) {
      const double em = exact_match(sug, can, agents.provider());
      const int cm = conceptual_match(sug, can, entry.query, agents);
      if (first || em > s.em_raw) {
        s.em_raw = em;
        s.em_suggestion = sug;
        s.em_canonical = can;
      }
      if (first || cm > s.cm_raw) {
        s.cm_raw = cm;
        s.cm_suggestion = sug;
        s.cm_canonical = can;
      }
      first = false;
    }
  }
  s.em = std::max(0.0, s.em_raw);
  s.cm = s.cm_raw / 10.0;
  return s;
}

FlawedScore score_flawed(const BenchmarkEntry& entry, const std::vector<std::string>& suggestions,
                         const std::vector<CandidateInstrument>& critiqued, Provider& p, double threshold) {
  if (entry.flawed_ivs.empty()) throw Error(ErrorCode::Domain, "flawed scoring needs an entry with flawed IVs");
  FlawedScore s;
  for (const auto& sug : suggestions) {
    for (const auto& bad : entry.flawed_ivs) {
      bool hit = detail::normalize_words(sug) == detail::normalize_words(bad);
      if (!hit && p.can_embed()) hit = exact_match(sug, bad, p) >= threshold;
      if (hit) {
        s.hg_flag = true;
        s.matched_suggestion = sug;
        s.matched_flawed = bad;
        break;
      }
    }
    if (s.hg_flag) break;
  }
  const auto valid = filter_valid(critiqued);
  bool injected_seen = false;
  bool injected_kept = false;
  for (const auto& c : critiqued) injected_seen = injected_seen || c.provenance == Provenance::Injected;
  for (const auto& c : valid) injected_kept = injected_kept || c.provenance == Provenance::Injected;
  s.critic_flag = injected_seen && !injected_kept;
  return s;
}

}  // namespace ivlab
