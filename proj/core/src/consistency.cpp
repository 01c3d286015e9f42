#include "ivlab/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include "ivlab/error.hpp"
#include "text_util.hpp"

namespace ivlab {

namespace {

// 2SLS estimates per candidate proxy; a failed fit is cached as nullopt.
class BetaCache {
 public:
  BetaCache(const PanelDataset& d, const CausalQuery& q, bool standardize_sample)
      : d_(d), q_(q), standardize_(standardize_sample) {}

  std::optional<double> beta(const std::string& proxy) {
    auto it = cache_.find(proxy);
    if (it != cache_.end()) return it->second;
    std::optional<double> b;
    try {
      b = estimate_iv(d_, q_, proxy, standardize_).beta;
      if (!std::isfinite(*b)) b.reset();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Lookup) throw;
    }
    cache_.emplace(proxy, b);
    return b;
  }

 private:
  const PanelDataset& d_;
  const CausalQuery& q_;
  bool standardize_;
  std::map<std::string, std::optional<double>> cache_;
};

std::vector<std::string> proxy_pool(const PanelDataset& d, const CausalQuery& q,
                                    const std::vector<std::string>& exclude) {
  std::set<std::string> skip(exclude.begin(), exclude.end());
  skip.insert(q.treatment);
  skip.insert(q.outcome);
  std::vector<std::string> pool;
  for (const auto& name : d.variable_names()) {
    if (!skip.contains(name)) pool.push_back(name);
  }
  if (pool.size() < 2) {
    throw Error(ErrorCode::InsufficientInstruments,
                "need at least 2 candidate proxy variables besides treatment, outcome and excluded proxies");
  }
  return pool;
}

RandomDeltas sample_pairs(const PanelDataset& d, const CausalQuery& q, const std::vector<std::string>& exclude,
                          std::mt19937_64& rng, std::size_t count, bool standardize_sample) {
  if (count < 1) throw Error(ErrorCode::Domain, "random pair count must be at least 1");
  validate(q);
  const auto pool = proxy_pool(d, q, exclude);
  BetaCache cache(d, q, standardize_sample);
  RandomDeltas out;
  out.samples.reserve(count);
  const std::size_t max_draws = 10 * count;
  std::size_t draws = 0;
  while (out.samples.size() < count) {
    if (draws == max_draws) {
      throw Error(ErrorCode::Exhaustion, "could not assemble " + std::to_string(count) +
                                             " estimable random pairs in " + std::to_string(max_draws) +
                                             " draws");
    }
    ++draws;
    std::uniform_int_distribution<std::size_t> first(0, pool.size() - 1);
    std::uniform_int_distribution<std::size_t> second(0, pool.size() - 2);
    const std::size_t i = first(rng);
    std::size_t j = second(rng);
    if (j >= i) ++j;
    const auto bi = cache.beta(pool[i]);
    const auto bj = cache.beta(pool[j]);
    if (!bi || !bj) {
      ++out.redraws;
      continue;
    }
    out.samples.push_back(delta(*bi, *bj));
    out.pairs.emplace_back(pool[i], pool[j]);
  }
  out.median = median(out.samples);
  return out;
}

}  // namespace

void validate(const CausalQuery& q) {
  if (q.treatment.empty() || q.outcome.empty()) throw Error(ErrorCode::Domain, "treatment and outcome must be named");
  if (q.treatment == q.outcome) throw Error(ErrorCode::Domain, "treatment and outcome must differ");
}

double delta(double b1, double b2) {
  if (!std::isfinite(b1) || !std::isfinite(b2)) throw Error(ErrorCode::Domain, "delta of non-finite estimate");
  return std::abs(b1 - b2);
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::InsufficientData, "median of empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

IVEstimate estimate_iv(const PanelDataset& d, const CausalQuery& q, const std::string& instrument,
                       bool standardize_sample) {
  const auto table = align_columns(d, {q.outcome, q.treatment, instrument});
  if (!standardize_sample) {
    return two_stage_least_squares(table.columns[0], table.columns[1], table.columns[2]);
  }
  const auto y = standardize(table.columns[0]);
  const auto t = standardize(table.columns[1]);
  const auto z = standardize(table.columns[2]);
  return two_stage_least_squares(y, t, z);
}

double delta_llm(const PanelDataset& d, const CausalQuery& q, const std::vector<std::string>& proxies,
                 bool standardize_sample, ConsistencyReport* detail) {
  validate(q);
  std::vector<std::pair<std::string, double>> estimable;
  std::set<std::string> seen;
  for (const auto& proxy : proxies) {
    if (!seen.insert(proxy).second) continue;
    try {
      const auto est = estimate_iv(d, q, proxy, standardize_sample);
      if (!std::isfinite(est.beta)) throw Error(ErrorCode::DivisionHazard, "non-finite estimate");
      estimable.emplace_back(proxy, est.beta);
      if (detail) detail->instrument_betas[proxy] = est;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Lookup) throw;
      if (detail) detail->skipped_instruments.push_back(proxy);
    }
  }
  if (estimable.size() < 2) {
    throw Error(ErrorCode::InsufficientInstruments,
                "need at least 2 estimable instruments, have " + std::to_string(estimable.size()));
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < estimable.size(); ++i) {
    for (std::size_t j = i + 1; j < estimable.size(); ++j) {
      const double dl = delta(estimable[i].second, estimable[j].second);
      if (detail) detail->pairwise.push_back({estimable[i].first, estimable[j].first, dl});
      sum += dl;
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

RandomDeltas delta_rand(const PanelDataset& d, const CausalQuery& q, const std::vector<std::string>& exclude,
                        std::mt19937_64& rng, std::size_t r, bool standardize_sample) {
  return sample_pairs(d, q, exclude, rng, r, standardize_sample);
}

double c_norm(double delta_llm, double delta_rand) {
  if (!std::isfinite(delta_llm) || !std::isfinite(delta_rand) || delta_llm < 0.0 || delta_rand < 0.0) {
    throw Error(ErrorCode::Domain, "C_norm inputs must be finite and nonnegative");
  }
  if (delta_rand == 0.0) throw Error(ErrorCode::DegenerateBaseline, "random-proxy baseline is zero");
  return delta_llm / delta_rand;
}

std::vector<double> null_distribution(const PanelDataset& d, const CausalQuery& q,
                                      const std::vector<std::string>& exclude, std::mt19937_64& rng,
                                      std::size_t n_pairs, bool standardize_sample) {
  return sample_pairs(d, q, exclude, rng, n_pairs, standardize_sample).samples;
}

double empirical_p(double observed, const std::vector<double>& null) {
  if (null.empty()) throw Error(ErrorCode::Domain, "empirical p-value needs a nonempty null sample");
  std::size_t at_or_below = 0;
  for (double v : null) {
    if (v <= observed) ++at_or_below;
  }
  return static_cast<double>(1 + at_or_below) / static_cast<double>(null.size() + 1);
}

ConsistencyReport evaluate_consistency(const PanelDataset& d, const CausalQuery& q,
                                       const std::vector<std::string>& proxies,
                                       const ConsistencySettings& settings) {
  ConsistencyReport report;
  report.delta_llm = delta_llm(d, q, proxies, settings.standardize, &report);

  std::mt19937_64 rand_rng(detail::mix_seed(settings.seed, 1));
  const auto baseline = delta_rand(d, q, proxies, rand_rng, settings.r, settings.standardize);
  report.delta_rand_summary = baseline.median;
  report.rand_redraws = baseline.redraws;
  report.c_norm = c_norm(report.delta_llm, report.delta_rand_summary);

  std::mt19937_64 null_rng(detail::mix_seed(settings.seed, 2));
  const auto null = sample_pairs(d, q, proxies, null_rng, settings.null_pairs, settings.standardize);
  report.null_samples = null.samples;
  report.null_redraws = null.redraws;
  report.p_value = empirical_p(report.delta_llm, report.null_samples);
  return report;
}

}  // namespace ivlab
