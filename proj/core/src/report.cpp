#include "ivlab/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include "ivlab/error.hpp"

namespace ivlab {

using nlohmann::json;

namespace {

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

json errors_json(const std::vector<StageError>& errors) {
  json out = json::array();
  for (const auto& e : errors) {
    out.push_back({{"stage", e.stage}, {"subject", e.subject}, {"code", e.code}, {"message", e.message}});
  }
  return out;
}

json judgment_json(const DirectionJudgment& j) {
  return {{"verdict", to_string(j.verdict)}, {"rationale", j.rationale}};
}

}  // namespace

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

std::string report_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end != epoch && *end == '\0') t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json to_json(const RunManifest& m) {
  return {{"command", m.command},       {"config", m.config},
          {"seed", m.seed},             {"provider", m.provider},
          {"input_digests", m.input_digests}, {"started", m.started},
          {"finished", m.finished}};
}

json to_json(const GrangerResult& g) {
  return {{"lag", g.lag},
          {"f_stat", g.f_stat},
          {"p_value", g.p_value},
          {"df_num", g.df_num},
          {"df_den", g.df_den},
          {"n", g.n},
          {"rss_restricted", g.rss_restricted},
          {"rss_unrestricted", g.rss_unrestricted},
          {"stationarity_warning", g.stationarity_warning}};
}

json to_json(const IVEstimate& e) {
  return {{"beta", e.beta}, {"intercept", e.intercept}, {"se", e.se}, {"first_stage_f", e.first_stage_f}, {"n", e.n}};
}

json to_json(const ConsistencyReport& r) {
  json pairwise = json::array();
  for (const auto& p : r.pairwise) pairwise.push_back({{"first", p.first}, {"second", p.second}, {"delta", p.delta}});
  json null = {{"samples", r.null_samples.size()}, {"redraws", r.null_redraws}};
  if (!r.null_samples.empty()) {
    null["q05"] = quantile(r.null_samples, 0.05);
    null["q50"] = quantile(r.null_samples, 0.50);
    null["q95"] = quantile(r.null_samples, 0.95);
  }
  return {{"delta_llm", r.delta_llm},
          {"delta_rand", r.delta_rand_summary},
          {"c_norm", r.c_norm},
          {"p_value", r.p_value},
          {"rand_redraws", r.rand_redraws},
          {"pairwise", pairwise},
          {"skipped_instruments", r.skipped_instruments},
          {"null", null}};
}

json to_json(const CandidateInstrument& c) {
  json out = {{"text", c.text},
              {"provenance", to_string(c.provenance)},
              {"exclusion", to_string(c.exclusion)},
              {"independence", to_string(c.independence)},
              {"exclusion_rationale", c.exclusion_rationale},
              {"independence_rationale", c.independence_rationale},
              {"proxy", nullptr}};
  if (c.proxy) out["proxy"] = *c.proxy;
  return out;
}

json to_json(const DiscoveryReport& r) {
  json screening = json::array();
  for (const auto& s : r.screening) {
    json row = {{"a", s.pair.a}, {"b", s.pair.b}, {"rho", s.pair.rho}, {"n", s.pair.n}, {"fate", s.fate}};
    if (s.judgment) row["direction"] = judgment_json(*s.judgment);
    if (s.granger) row["granger"] = to_json(*s.granger);
    if (s.granger_reverse) row["granger_reverse"] = to_json(*s.granger_reverse);
    screening.push_back(row);
  }
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    json rounds = json::array();
    for (const auto& round : p.rounds) {
      json cands = json::array();
      for (const auto& c : round.candidates) cands.push_back(to_json(c));
      rounds.push_back({{"round", round.round}, {"candidates", cands}});
    }
    json estimates = json::object();
    for (const auto& [proxy, est] : p.estimates) estimates[proxy] = to_json(est);
    json row = {{"treatment", p.query.treatment},
                {"outcome", p.query.outcome},
                {"context", p.query.context},
                {"rho", p.rho},
                {"direction", judgment_json(p.judgment)},
                {"granger", to_json(p.granger)},
                {"confounders", p.confounders},
                {"rounds", rounds},
                {"reinvocations", p.reinvocations},
                {"grounded", p.grounded},
                {"estimates", estimates},
                {"estimate_errors", p.estimate_errors},
                {"status", p.status},
                {"consistency", nullptr},
                {"errors", errors_json(p.errors)}};
    if (p.consistency) row["consistency"] = to_json(*p.consistency);
    pairs.push_back(row);
  }
  json events = json::array();
  for (const auto& e : r.trace.events) {
    events.push_back({{"agent", e.agent}, {"subject", e.subject}, {"decision", e.decision}, {"rationale", e.rationale}});
  }
  return {{"preselect",
           {{"pairs_considered", r.preselect.pairs_considered},
            {"pairs_skipped", r.preselect.pairs_skipped},
            {"below_tau", r.preselect.below_tau},
            {"below_n_min", r.preselect.below_n_min}}},
          {"stage_counts",
           {{"preselected", r.counts.preselected},
            {"human_kept", r.counts.human_kept},
            {"directional", r.counts.directional},
            {"retained", r.counts.retained},
            {"evaluated", r.counts.evaluated}}},
          {"screening", screening},
          {"pairs", pairs},
          {"errors", errors_json(r.errors)},
          {"diagnostics", r.trace.diagnostics},
          {"events", events}};
}

json to_json(const std::vector<RecoveryRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json cands = json::array();
    for (const auto& c : r.candidates) cands.push_back(to_json(c));
    out.push_back({{"treatment", r.entry.query.treatment},
                   {"outcome", r.entry.query.outcome},
                   {"canonical_ivs", r.entry.canonical_ivs},
                   {"source", r.entry.source},
                   {"suggestions", r.suggestions},
                   {"candidates", cands},
                   {"valid", r.valid},
                   {"em", r.score.em},
                   {"em_raw", r.score.em_raw},
                   {"em_pair", {r.score.em_suggestion, r.score.em_canonical}},
                   {"cm", r.score.cm},
                   {"cm_pair", {r.score.cm_suggestion, r.score.cm_canonical}},
                   {"error", r.error}});
  }
  return out;
}

json to_json(const std::vector<FlawedRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json cands = json::array();
    for (const auto& c : r.candidates) cands.push_back(to_json(c));
    out.push_back({{"treatment", r.entry.query.treatment},
                   {"outcome", r.entry.query.outcome},
                   {"flawed_ivs", r.entry.flawed_ivs},
                   {"injected", r.injected},
                   {"suggestions", r.suggestions},
                   {"candidates", cands},
                   {"hg", r.score.hg_flag ? 1 : 0},
                   {"critic", r.score.critic_flag ? 1 : 0},
                   {"matched_suggestion", r.score.matched_suggestion},
                   {"error", r.error}});
  }
  return out;
}

std::string render_document(const std::string& kind, const json& body, const RunManifest& m) {
  json doc = {{"schema_version", kReportSchemaVersion}, {"manifest", to_json(m)}, {kind, body}};
  return doc.dump(2) + "\n";
}

std::string discovery_summary(const DiscoveryReport& r) {
  std::ostringstream out;
  out << "Stage counts\n"
      << "  preselected  " << r.counts.preselected << "\n"
      << "  human kept   " << r.counts.human_kept << "\n"
      << "  directional  " << r.counts.directional << "\n"
      << "  retained     " << r.counts.retained << "\n"
      << "  evaluated    " << r.counts.evaluated << "\n\n";
  out << pad("treatment -> outcome", 44) << pad("status", 26) << pad("IVs", 5) << pad("C_norm", 10) << "p\n";
  for (const auto& p : r.pairs) {
    out << pad(p.query.treatment + " -> " + p.query.outcome, 44) << pad(p.status, 26)
        << pad(std::to_string(p.grounded.size()), 5)
        << pad(p.consistency ? fixed(p.consistency->c_norm, 4) : "-", 10)
        << (p.consistency ? fixed(p.consistency->p_value, 4) : "-") << "\n";
    for (const auto& [proxy, est] : p.estimates) {
      out << "    " << pad(proxy, 40) << "beta " << fixed(est.beta, 4) << "  se " << fixed(est.se, 4) << "  F "
          << fixed(est.first_stage_f, 2) << "\n";
    }
  }
  if (!r.errors.empty()) {
    out << "\nStage errors\n";
    for (const auto& e : r.errors) out << "  [" << e.stage << "] " << e.subject << ": " << e.message << "\n";
  }
  return out.str();
}

std::string recovery_table(const std::vector<RecoveryRow>& rows) {
  std::ostringstream out;
  out << pad("treatment -> outcome", 44) << pad("EM", 8) << pad("CM", 8) << "best suggestion\n";
  for (const auto& r : rows) {
    out << pad(r.entry.query.treatment + " -> " + r.entry.query.outcome, 44);
    if (!r.error.empty()) {
      out << "error: " << r.error << "\n";
      continue;
    }
    out << pad(fixed(r.score.em, 3), 8) << pad(fixed(r.score.cm, 3), 8) << r.score.cm_suggestion << "\n";
  }
  return out.str();
}

std::string flawed_table(const std::vector<FlawedRow>& rows) {
  std::ostringstream out;
  out << pad("treatment -> outcome", 44) << pad("HG", 4) << pad("Critic", 8) << "injected\n";
  for (const auto& r : rows) {
    out << pad(r.entry.query.treatment + " -> " + r.entry.query.outcome, 44);
    if (!r.error.empty()) {
      out << "error: " << r.error << "\n";
      continue;
    }
    out << pad(r.score.hg_flag ? "1" : "0", 4) << pad(r.score.critic_flag ? "1" : "0", 8) << r.injected << "\n";
  }
  return out.str();
}

std::string ate_samples_tsv(const PairDiscovery& p) {
  std::ostringstream out;
  out.precision(10);
  out << "instrument\tbeta\n";
  for (const auto& proxy : p.grounded) {
    auto it = p.ate_samples.find(proxy);
    if (it == p.ate_samples.end()) continue;
    for (double b : it->second) out << proxy << '\t' << b << '\n';
  }
  return out.str();
}

std::string file_stem(const std::string& name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
  return out;
}

}  // namespace ivlab
