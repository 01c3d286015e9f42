#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ivlab/panel.hpp"
#include "ivlab/query.hpp"
#include "ivlab/regression.hpp"

namespace ivlab {

struct ConsistencySettings {
  std::size_t r = 100;             // random pairs behind the C_norm denominator
  std::size_t null_pairs = 2000;   // random pairs behind the p-value
  std::uint64_t seed = 0;
  bool standardize = false;        // standardize each aligned sample before 2SLS
};

struct PairDelta {
  std::string first;
  std::string second;
  double delta = 0.0;
};

/// |Delta| samples over random proxy pairs.
struct RandomDeltas {
  std::vector<double> samples;
  std::vector<std::pair<std::string, std::string>> pairs;
  double median = 0.0;
  std::size_t redraws = 0;  // draws discarded because a 2SLS fit failed
};

struct ConsistencyReport {
  std::map<std::string, IVEstimate> instrument_betas;
  std::vector<PairDelta> pairwise;
  std::vector<std::string> skipped_instruments;  // proxies whose 2SLS failed
  double delta_llm = 0.0;
  double delta_rand_summary = 0.0;
  double c_norm = 0.0;
  std::size_t rand_redraws = 0;
  std::vector<double> null_samples;
  std::size_t null_redraws = 0;
  double p_value = 1.0;
};

/// |b1 - b2|; Domain on non-finite input.
double delta(double b1, double b2);

/// 2SLS of outcome on treatment instrumented by `instrument` over complete cases.
IVEstimate estimate_iv(const PanelDataset& d, const CausalQuery& q, const std::string& instrument,
                       bool standardize_sample = false);

/// Mean pairwise |Delta| over all unordered pairs of estimable proxies.
/// Throws InsufficientInstruments when fewer than 2 proxies are estimable.
double delta_llm(const PanelDataset& d, const CausalQuery& q, const std::vector<std::string>& proxies,
                 bool standardize_sample = false, ConsistencyReport* detail = nullptr);

/// `r` |Delta| draws over random pairs from variables other than T, Y and `exclude`.
/// Failed fits are redrawn; more than 10 * r total draws raises Exhaustion.
RandomDeltas delta_rand(const PanelDataset& d, const CausalQuery& q, const std::vector<std::string>& exclude,
                        std::mt19937_64& rng, std::size_t r, bool standardize_sample = false);

/// delta_llm / delta_rand; DegenerateBaseline when delta_rand == 0.
double c_norm(double delta_llm, double delta_rand);

std::vector<double> null_distribution(const PanelDataset& d, const CausalQuery& q,
                                      const std::vector<std::string>& exclude, std::mt19937_64& rng,
                                      std::size_t n_pairs = 2000, bool standardize_sample = false);

/// One-sided lower-tail p with the add-one rule: (1 + #{null_i <= observed}) / (N + 1).
double empirical_p(double observed, const std::vector<double>& null);

double median(std::vector<double> values);

/// Full metric for one (T, Y) and its grounded proxies. The denominator and
/// the null use independent streams derived from settings.seed.
ConsistencyReport evaluate_consistency(const PanelDataset& d, const CausalQuery& q,
                                       const std::vector<std::string>& proxies,
                                       const ConsistencySettings& settings);

}  // namespace ivlab
