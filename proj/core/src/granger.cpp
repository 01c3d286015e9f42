#include "ivlab/granger.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "ivlab/error.hpp"
#include "ivlab/regression.hpp"

namespace ivlab {

namespace {

// A run of consecutive time points where both series are observed.
struct Segment {
  std::vector<double> cause;
  std::vector<double> effect;
};

struct LaggedDesign {
  Vector target;
  Matrix restricted;
  Matrix unrestricted;
};

std::size_t usable_rows(const std::vector<Segment>& segments, int trim) {
  std::size_t rows = 0;
  for (const auto& s : segments) {
    if (s.effect.size() > static_cast<std::size_t>(trim)) rows += s.effect.size() - trim;
  }
  return rows;
}

LaggedDesign build_design(const std::vector<Segment>& segments, int lag, int trim) {
  const auto rows = static_cast<Eigen::Index>(usable_rows(segments, trim));
  LaggedDesign d;
  d.target.resize(rows);
  d.restricted.resize(rows, 1 + lag);
  d.unrestricted.resize(rows, 1 + 2 * lag);
  Eigen::Index r = 0;
  for (const auto& s : segments) {
    for (std::size_t t = static_cast<std::size_t>(trim); t < s.effect.size(); ++t, ++r) {
      d.target(r) = s.effect[t];
      d.restricted(r, 0) = 1.0;
      d.unrestricted(r, 0) = 1.0;
      for (int k = 1; k <= lag; ++k) {
        d.restricted(r, k) = s.effect[t - k];
        d.unrestricted(r, k) = s.effect[t - k];
        d.unrestricted(r, lag + k) = s.cause[t - k];
      }
    }
  }
  return d;
}

double ar1_coefficient(const std::vector<Segment>& segments, bool use_cause) {
  std::vector<double> now, prev;
  for (const auto& s : segments) {
    const auto& v = use_cause ? s.cause : s.effect;
    for (std::size_t t = 1; t < v.size(); ++t) {
      now.push_back(v[t]);
      prev.push_back(v[t - 1]);
    }
  }
  try {
    std::vector<std::span<const double>> cols{prev};
    return ols(to_vector(now), design_with_intercept(cols)).coefficients(1);
  } catch (const Error&) {
    return 0.0;
  }
}

GrangerResult run_test(const std::vector<Segment>& segments, int lag) {
  if (lag < 1) throw Error(ErrorCode::Domain, "Granger lag must be positive");
  const std::size_t rows = usable_rows(segments, lag);
  const std::size_t needed = 3 * static_cast<std::size_t>(lag) + 10;
  if (rows < needed) {
    throw Error(ErrorCode::InsufficientData, "Granger test with lag " + std::to_string(lag) + " needs " +
                                                 std::to_string(needed) + " usable rows, have " +
                                                 std::to_string(rows));
  }
  const LaggedDesign design = build_design(segments, lag, lag);
  const LinearFit restricted = ols(design.target, design.restricted);
  const LinearFit unrestricted = ols(design.target, design.unrestricted);

  GrangerResult res;
  res.lag = lag;
  res.n = rows;
  res.df_num = lag;
  res.df_den = static_cast<int>(rows) - 2 * lag - 1;
  res.rss_restricted = restricted.rss;
  res.rss_unrestricted = std::min(unrestricted.rss, restricted.rss);
  const double gain = std::max(0.0, res.rss_restricted - res.rss_unrestricted);
  if (res.rss_unrestricted > 0.0) {
    res.f_stat = (gain / lag) / (res.rss_unrestricted / res.df_den);
  } else {
    res.f_stat = gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  if (std::isinf(res.f_stat)) {
    res.p_value = 0.0;
  } else {
    boost::math::fisher_f_distribution<double> dist(res.df_num, res.df_den);
    res.p_value = std::clamp(boost::math::cdf(boost::math::complement(dist, res.f_stat)), 0.0, 1.0);
  }
  res.stationarity_warning = ar1_coefficient(segments, true) >= 0.95 || ar1_coefficient(segments, false) >= 0.95;
  return res;
}

std::vector<Segment> single_segment(std::span<const double> cause, std::span<const double> effect) {
  if (cause.size() != effect.size()) throw Error(ErrorCode::Domain, "Granger series lengths differ");
  return {Segment{{cause.begin(), cause.end()}, {effect.begin(), effect.end()}}};
}

std::vector<Segment> panel_segments(const PanelDataset& d, const std::string& cause, const std::string& effect) {
  const auto& xc = d.column(cause);
  const auto& yc = d.column(effect);
  std::vector<Segment> segments;
  Segment current;
  std::size_t last_entity = static_cast<std::size_t>(-1);
  int last_time = 0;
  for (const auto& [key, xv] : xc) {
    auto it = yc.find(key);
    if (it == yc.end()) continue;
    const bool continues = key.first == last_entity && key.second == last_time + 1;
    if (!continues && !current.effect.empty()) {
      segments.push_back(std::move(current));
      current = {};
    }
    current.cause.push_back(xv);
    current.effect.push_back(it->second);
    last_entity = key.first;
    last_time = key.second;
  }
  if (!current.effect.empty()) segments.push_back(std::move(current));
  return segments;
}

int select_lag(const std::vector<Segment>& segments, int max_lag) {
  if (max_lag < 1) throw Error(ErrorCode::Domain, "max lag must be positive");
  int best_lag = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int lag = 1; lag <= max_lag; ++lag) {
    if (usable_rows(segments, max_lag) < 3 * static_cast<std::size_t>(lag) + 10) break;
    const LaggedDesign design = build_design(segments, lag, max_lag);
    double aic;
    try {
      const LinearFit fit = ols(design.target, design.unrestricted);
      const auto n = static_cast<double>(fit.n);
      aic = fit.rss > 0.0 ? n * std::log(fit.rss / n) + 2.0 * static_cast<double>(fit.k)
                          : -std::numeric_limits<double>::infinity();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Collinearity) throw;
      continue;
    }
    if (best_lag == 0 || aic < best_aic) {
      best_aic = aic;
      best_lag = lag;
    }
  }
  if (best_lag == 0) throw Error(ErrorCode::InsufficientData, "no lag order is estimable");
  return best_lag;
}

}  // namespace

GrangerResult granger_test(std::span<const double> cause, std::span<const double> effect, int lag) {
  return run_test(single_segment(cause, effect), lag);
}

GrangerResult granger_test(const PanelDataset& d, const std::string& cause, const std::string& effect, int lag) {
  return run_test(panel_segments(d, cause, effect), lag);
}

int select_lag_aic(const PanelDataset& d, const std::string& cause, const std::string& effect, int max_lag) {
  return select_lag(panel_segments(d, cause, effect), max_lag);
}

int select_lag_aic(std::span<const double> cause, std::span<const double> effect, int max_lag) {
  return select_lag(single_segment(cause, effect), max_lag);
}

}  // namespace ivlab
