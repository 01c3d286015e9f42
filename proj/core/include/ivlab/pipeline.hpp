#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ivlab/agents.hpp"
#include "ivlab/consistency.hpp"
#include "ivlab/granger.hpp"
#include "ivlab/panel.hpp"
#include "ivlab/preselect.hpp"
#include "ivlab/recovery.hpp"
#include "ivlab/regression.hpp"

namespace ivlab {

enum class LagPolicy { Fixed, Aic };

struct PipelineConfig {
  double tau = 0.7;
  std::size_t n_min = 30;
  std::size_t i = 5;  // instruments per proposal round
  std::size_t j = 5;  // confounders per pair
  LagPolicy lag_policy = LagPolicy::Aic;
  int lag = 1;      // used with LagPolicy::Fixed
  int max_lag = 4;  // AIC scan upper bound
  double alpha = 0.05;
  bool strict_direction = false;  // also require the reverse Granger test not to reject
  std::size_t max_reinvocations = 3;
  std::size_t ate_bootstrap = 200;  // bootstrap 2SLS draws per grounded proxy, 0 disables
  double flawed_threshold = 0.85;
  ConsistencySettings consistency;
  AgentSettings agents;
  std::uint64_t seed = 0;

  /// Throws Config on out-of-range settings.
  void validate() const;
};

/// Failure recorded against a stage instead of aborting the run.
struct StageError {
  std::string stage;
  std::string subject;
  std::string code;
  std::string message;
};

/// What happened to one preselected pair before instrument search.
struct PairScreening {
  PairCandidate pair;
  std::string fate;  // dropped_by_human_proxy | non_directional | granger_disagrees | retained | error
  std::optional<DirectionJudgment> judgment;
  std::optional<GrangerResult> granger;          // in the LLM's direction
  std::optional<GrangerResult> granger_reverse;  // only with strict_direction
};

struct InstrumentRound {
  std::size_t round = 0;
  std::vector<CandidateInstrument> candidates;  // critiqued, with proxies for valid ones
};

struct PairDiscovery {
  CausalQuery query;  // oriented treatment -> outcome
  double rho = 0.0;
  DirectionJudgment judgment;
  GrangerResult granger;
  std::vector<std::string> confounders;
  std::vector<InstrumentRound> rounds;
  std::size_t reinvocations = 0;
  std::vector<std::string> grounded;  // distinct proxies in grounding order
  std::map<std::string, IVEstimate> estimates;
  std::map<std::string, std::string> estimate_errors;
  std::map<std::string, std::vector<double>> ate_samples;
  std::optional<ConsistencyReport> consistency;
  std::string status;  // evaluated | consistency-unevaluable | failed
  std::vector<StageError> errors;
};

struct StageCounts {
  std::size_t preselected = 0;
  std::size_t human_kept = 0;
  std::size_t directional = 0;
  std::size_t retained = 0;
  std::size_t evaluated = 0;
};

struct DiscoveryReport {
  PreselectDiagnostics preselect;
  StageCounts counts;
  std::vector<PairScreening> screening;
  std::vector<PairDiscovery> pairs;
  std::vector<StageError> errors;
  AgentTrace trace;
};

/// The full discovery pipeline. Pairs are processed in preselection order and
/// every random stream is derived from cfg.seed, so a scripted or replayed
/// provider makes the report reproducible.
DiscoveryReport run_discovery(const PanelDataset& d, const PipelineConfig& cfg, AgentRunner& agents);

/// Bootstrap distribution of the 2SLS estimate over complete cases.
std::vector<double> bootstrap_iv(const PanelDataset& d, const CausalQuery& q, const std::string& instrument,
                                 std::size_t draws, std::uint64_t seed);

struct RecoveryRow {
  BenchmarkEntry entry;
  std::vector<std::string> suggestions;
  std::vector<CandidateInstrument> candidates;
  std::vector<std::string> valid;  // critic-approved texts that were scored
  RecoveryScore score;
  std::string error;
};

/// Generator and critics per entry, scored over the critic-approved
/// instruments. An entry with none approved scores EM = CM = 0.
std::vector<RecoveryRow> run_recovery_benchmark(const std::vector<BenchmarkEntry>& entries,
                                                const PipelineConfig& cfg, AgentRunner& agents);

struct FlawedRow {
  BenchmarkEntry entry;
  std::vector<std::string> suggestions;
  std::vector<CandidateInstrument> candidates;  // after injection and critique
  std::string injected;
  FlawedScore score;
  std::string error;
};

/// Generate, flag flawed mentions, inject the first flawed IV, critique.
std::vector<FlawedRow> run_flawed_benchmark(const std::vector<BenchmarkEntry>& entries, const PipelineConfig& cfg,
                                            AgentRunner& agents);

}  // namespace ivlab
