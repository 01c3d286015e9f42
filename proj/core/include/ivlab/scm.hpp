#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ivlab/panel.hpp"

namespace ivlab {

/// One instrument of a linear SCM. `exclusion_leak` adds a direct Z -> Y path,
/// `confounder_loading` makes Z depend on the confounder U. Both zero means valid.
struct InstrumentSpec {
  double strength = 0.8;
  double exclusion_leak = 0.0;
  double confounder_loading = 0.0;

  bool valid() const { return exclusion_leak == 0.0 && confounder_loading == 0.0; }
};

struct NoiseSds {
  double instrument = 1.0;
  double treatment = 1.0;
  double outcome = 1.0;
};

/// Linear SCM with a scalar confounder U ~ N(0, 1):
///   Z_k = loading_k U + e_k
///   T   = sum_k strength_k Z_k + gamma_t U + e_T
///   Y   = beta_star T + gamma_y U + sum_k leak_k Z_k + e_Y
/// plus `noise_variables` independent N(0, 1) columns R1..Rm.
struct SCMSpec {
  double beta_star = 1.5;
  double gamma_t = 0.8;
  double gamma_y = 0.8;
  std::vector<InstrumentSpec> instruments{InstrumentSpec{}};
  NoiseSds noise;
  std::size_t noise_variables = 0;
  std::size_t n = 1000;
  std::uint64_t seed = 0;

  /// Throws Domain on non-positive noise sds, n < 10, or non-finite coefficients.
  void validate() const;
};

/// Closed-form population moments implied by an SCMSpec.
struct SCMMoments {
  double var_t = 0.0;
  double cov_t_y = 0.0;
  std::vector<double> cov_z_t;
  std::vector<double> cov_z_y;
  double ols_limit = 0.0;               // Cov(T, Y) / Var(T)
  std::vector<double> iv_limit;         // Cov(Z_k, Y) / Cov(Z_k, T), NaN when Cov(Z_k, T) = 0
};

SCMMoments analytic_moments(const SCMSpec& spec);

struct GroundTruth {
  double beta_star = 0.0;
  std::string treatment = "T";
  std::string outcome = "Y";
  std::vector<std::string> instruments;  // Z1..Zk
  std::vector<bool> instrument_valid;
  std::vector<std::string> noise_variables;  // R1..Rm
  SCMMoments moments;
};

struct SCMData {
  PanelDataset dataset;  // single entity "scm", time 0..n-1
  GroundTruth truth;
  std::map<std::string, std::vector<double>> columns;
};

SCMData generate(const SCMSpec& spec);

/// Two series with known Granger structure:
///   x_t = cause_ar x_{t-1} + e_x
///   y_t = effect_ar y_{t-1} + gamma x_{t-1} + e_y
/// `effect_sd` may be 0 for deterministic lead-lag fixtures.
struct LaggedSpec {
  double cause_ar = 0.0;
  double effect_ar = 0.5;
  double gamma = 0.8;
  double cause_sd = 1.0;
  double effect_sd = 1.0;
  std::size_t n = 300;
  std::size_t entities = 1;
  std::size_t burn_in = 50;
  std::uint64_t seed = 0;
};

struct LaggedData {
  PanelDataset dataset;  // variables "x" and "y", entities e00, e01, ...
  std::vector<double> x;  // first entity
  std::vector<double> y;
};

/// Throws Stability when |cause_ar| >= 1 or |effect_ar| >= 1.
LaggedData generate_lagged(const LaggedSpec& spec);

/// Binary instrument and treatment with threshold-crossing compliance:
///   Z ~ Bernoulli(p_instrument), T = 1[base + shift Z + gamma_t U + v > 0],
///   Y = beta_star T + gamma_y U + e.
struct BinarySpec {
  double beta_star = 2.0;
  double p_instrument = 0.5;
  double base = -0.5;
  double shift = 1.0;
  double gamma_t = 0.8;
  double gamma_y = 0.8;
  std::size_t n = 500;
  std::uint64_t seed = 0;
};

struct BinaryData {
  std::vector<double> y;
  std::vector<double> t;
  std::vector<double> z;
};

BinaryData generate_binary(const BinarySpec& spec);

}  // namespace ivlab
