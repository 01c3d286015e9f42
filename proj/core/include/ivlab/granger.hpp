#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "ivlab/panel.hpp"

namespace ivlab {

/// F-test of whether `lag` lags of the cause improve an autoregression of the
/// effect on its own `lag` lags.
struct GrangerResult {
  double f_stat = 0.0;
  double p_value = 1.0;
  int lag = 1;
  double rss_restricted = 0.0;
  double rss_unrestricted = 0.0;
  std::size_t n = 0;  // rows after lag trimming
  int df_num = 0;
  int df_den = 0;
  // Heuristic only: set when either series looks close to a unit root
  // (lag-1 autoregressive coefficient >= 0.95). No stationarity test is run.
  bool stationarity_warning = false;
};

/// Single contiguous series: does `cause` Granger-cause `effect`?
/// Requires at least 3 * lag + 10 rows after trimming.
GrangerResult granger_test(std::span<const double> cause, std::span<const double> effect, int lag);

/// Panel version: lags are built within each entity (a row needs both series
/// present at t, t-1, ..., t-lag) and then pooled into one regression.
GrangerResult granger_test(const PanelDataset& d, const std::string& cause, const std::string& effect,
                           int lag);

/// Picks the lag in 1..max_lag minimizing the unrestricted model's AIC over a
/// common sample trimmed at max_lag.
int select_lag_aic(const PanelDataset& d, const std::string& cause, const std::string& effect, int max_lag);
int select_lag_aic(std::span<const double> cause, std::span<const double> effect, int max_lag);

}  // namespace ivlab
