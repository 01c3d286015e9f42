#include "ivlab/scm.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "ivlab/error.hpp"

namespace ivlab {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorCode::Domain, std::string(what) + " must be finite");
}

std::string entity_name(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "e%02zu", i);
  return buf;
}

}  // namespace

void SCMSpec::validate() const {
  if (n < 10) throw Error(ErrorCode::Domain, "SCM sample size must be at least 10");
  if (!(noise.instrument > 0.0 && noise.treatment > 0.0 && noise.outcome > 0.0)) {
    throw Error(ErrorCode::Domain, "SCM noise standard deviations must be positive");
  }
  require_finite(beta_star, "beta_star");
  require_finite(gamma_t, "gamma_t");
  require_finite(gamma_y, "gamma_y");
  for (const auto& z : instruments) {
    require_finite(z.strength, "instrument strength");
    require_finite(z.exclusion_leak, "exclusion leak");
    require_finite(z.confounder_loading, "confounder loading");
  }
}

SCMMoments analytic_moments(const SCMSpec& spec) {
  const std::size_t k = spec.instruments.size();
  const double sz2 = spec.noise.instrument * spec.noise.instrument;
  auto cov_zz = [&](std::size_t a, std::size_t b) {
    const double shared = spec.instruments[a].confounder_loading * spec.instruments[b].confounder_loading;
    return a == b ? shared + sz2 : shared;
  };

  SCMMoments m;
  double cov_t_u = spec.gamma_t;
  for (const auto& z : spec.instruments) cov_t_u += z.strength * z.confounder_loading;

  m.cov_z_t.assign(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    double c = spec.gamma_t * spec.instruments[a].confounder_loading;
    for (std::size_t b = 0; b < k; ++b) c += spec.instruments[b].strength * cov_zz(a, b);
    m.cov_z_t[a] = c;
  }

  m.var_t = spec.gamma_t * spec.gamma_t + spec.noise.treatment * spec.noise.treatment;
  for (std::size_t a = 0; a < k; ++a) {
    m.var_t += 2.0 * spec.gamma_t * spec.instruments[a].strength * spec.instruments[a].confounder_loading;
    for (std::size_t b = 0; b < k; ++b) {
      m.var_t += spec.instruments[a].strength * spec.instruments[b].strength * cov_zz(a, b);
    }
  }

  double cov_t_leak = 0.0;
  for (std::size_t b = 0; b < k; ++b) cov_t_leak += spec.instruments[b].exclusion_leak * m.cov_z_t[b];
  m.cov_t_y = spec.beta_star * m.var_t + spec.gamma_y * cov_t_u + cov_t_leak;
  m.ols_limit = m.cov_t_y / m.var_t;

  m.cov_z_y.assign(k, 0.0);
  m.iv_limit.assign(k, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t a = 0; a < k; ++a) {
    double c = spec.beta_star * m.cov_z_t[a] + spec.gamma_y * spec.instruments[a].confounder_loading;
    for (std::size_t b = 0; b < k; ++b) c += spec.instruments[b].exclusion_leak * cov_zz(a, b);
    m.cov_z_y[a] = c;
    if (m.cov_z_t[a] != 0.0) m.iv_limit[a] = c / m.cov_z_t[a];
  }
  return m;
}

SCMData generate(const SCMSpec& spec) {
  spec.validate();
  const std::size_t k = spec.instruments.size();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SCMData out;
  out.truth.beta_star = spec.beta_star;
  out.truth.moments = analytic_moments(spec);
  for (std::size_t i = 0; i < k; ++i) {
    out.truth.instruments.push_back("Z" + std::to_string(i + 1));
    out.truth.instrument_valid.push_back(spec.instruments[i].valid());
  }
  for (std::size_t i = 0; i < spec.noise_variables; ++i) {
    out.truth.noise_variables.push_back("R" + std::to_string(i + 1));
  }

  std::vector<double> t(spec.n), y(spec.n);
  std::vector<std::vector<double>> z(k, std::vector<double>(spec.n));
  std::vector<std::vector<double>> r(spec.noise_variables, std::vector<double>(spec.n));
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double u = normal(rng);
    double ti = spec.gamma_t * u;
    double leak = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const auto& inst = spec.instruments[j];
      z[j][i] = inst.confounder_loading * u + spec.noise.instrument * normal(rng);
      ti += inst.strength * z[j][i];
      leak += inst.exclusion_leak * z[j][i];
    }
    t[i] = ti + spec.noise.treatment * normal(rng);
    y[i] = spec.beta_star * t[i] + spec.gamma_y * u + leak + spec.noise.outcome * normal(rng);
    for (auto& col : r) col[i] = normal(rng);
  }

  PanelDataset::Builder builder;
  auto add = [&](const std::string& name, const std::string& description, const std::vector<double>& v) {
    builder.add_variable({name, description, ""});
    for (std::size_t i = 0; i < v.size(); ++i) builder.add_observation("scm", static_cast<int>(i), name, v[i]);
    out.columns[name] = v;
  };
  add(out.truth.treatment, "treatment", t);
  add(out.truth.outcome, "outcome", y);
  for (std::size_t j = 0; j < k; ++j) {
    add(out.truth.instruments[j], out.truth.instrument_valid[j] ? "valid instrument" : "invalid instrument", z[j]);
  }
  for (std::size_t j = 0; j < spec.noise_variables; ++j) add(out.truth.noise_variables[j], "pure noise", r[j]);
  out.dataset = std::move(builder).build();
  return out;
}

LaggedData generate_lagged(const LaggedSpec& spec) {
  if (!(std::abs(spec.cause_ar) < 1.0) || !(std::abs(spec.effect_ar) < 1.0)) {
    throw Error(ErrorCode::Stability, "autoregressive coefficients must satisfy |a| < 1");
  }
  if (spec.cause_sd <= 0.0 || spec.effect_sd < 0.0) {
    throw Error(ErrorCode::Domain, "cause_sd must be positive and effect_sd nonnegative");
  }
  if (spec.n < 2 || spec.entities < 1) throw Error(ErrorCode::Domain, "need n >= 2 and at least one entity");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LaggedData out;
  PanelDataset::Builder builder;
  builder.add_variable({"x", "cause series", ""});
  builder.add_variable({"y", "effect series", ""});
  for (std::size_t e = 0; e < spec.entities; ++e) {
    double x_prev = 0.0, y_prev = 0.0;
    const std::string entity = entity_name(e);
    for (std::size_t t = 0; t < spec.burn_in + spec.n; ++t) {
      const double x = spec.cause_ar * x_prev + spec.cause_sd * normal(rng);
      const double y = spec.effect_ar * y_prev + spec.gamma * x_prev + spec.effect_sd * normal(rng);
      x_prev = x;
      y_prev = y;
      if (t < spec.burn_in) continue;
      const int time = static_cast<int>(t - spec.burn_in);
      builder.add_observation(entity, time, "x", x);
      builder.add_observation(entity, time, "y", y);
      if (e == 0) {
        out.x.push_back(x);
        out.y.push_back(y);
      }
    }
  }
  out.dataset = std::move(builder).build();
  return out;
}

BinaryData generate_binary(const BinarySpec& spec) {
  if (!(spec.p_instrument > 0.0 && spec.p_instrument < 1.0)) {
    throw Error(ErrorCode::Domain, "p_instrument must lie in (0, 1)");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(spec.p_instrument);
  BinaryData out;
  out.y.reserve(spec.n);
  out.t.reserve(spec.n);
  out.z.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double z = coin(rng) ? 1.0 : 0.0;
    const double u = normal(rng);
    const double t = spec.base + spec.shift * z + spec.gamma_t * u + normal(rng) > 0.0 ? 1.0 : 0.0;
    out.z.push_back(z);
    out.t.push_back(t);
    out.y.push_back(spec.beta_star * t + spec.gamma_y * u + normal(rng));
  }
  return out;
}

}  // namespace ivlab
