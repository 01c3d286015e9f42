#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "ivlab/consistency.hpp"
#include "ivlab/scm.hpp"
#include "oracles.hpp"

using namespace ivlab;

namespace {

CausalQuery tq() { return {"T", "Y", ""}; }

SCMSpec noisy_scm(std::uint64_t seed, std::size_t n = 2000) {
  SCMSpec spec;
  spec.instruments = {InstrumentSpec{}, InstrumentSpec{}};
  spec.gamma_t = 1.0;
  spec.gamma_y = 1.0;
  spec.noise_variables = 10;
  spec.n = n;
  spec.seed = seed;
  return spec;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    worst = std::max(worst, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return worst;
}

}  // namespace

TEST(Delta, Examples) {
  EXPECT_EQ(delta(2.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(delta(1.5, 2.0), 0.5);
  EXPECT_IVLAB_ERROR(delta(NAN, 1.0), ErrorCode::Domain);
  EXPECT_IVLAB_ERROR(delta(1.0, INFINITY), ErrorCode::Domain);
}

TEST(Delta, SymmetricAndNonnegative) {
  std::mt19937_64 rng(0);
  std::normal_distribution<double> n(0, 10);
  for (int i = 0; i < 100; ++i) {
    const double a = n(rng), b = n(rng);
    EXPECT_EQ(delta(a, b), delta(b, a));
    EXPECT_GE(delta(a, b), 0.0);
    EXPECT_EQ(delta(a, a), 0.0);
  }
}

TEST(DeltaLlm, NoiselessInstrumentsAgree) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::map<std::string, std::vector<double>> cols;
  for (int i = 0; i < 50; ++i) {
    const double z1 = n(rng), z2 = n(rng);
    const double t = z1 + z2 + n(rng);
    cols["Z1"].push_back(z1);
    cols["Z2"].push_back(z2);
    cols["T"].push_back(t);
    cols["Y"].push_back(1.5 * t);
  }
  EXPECT_NEAR(delta_llm(fixture::panel(cols), tq(), {"Z1", "Z2"}), 0.0, 1e-9);
}

TEST(DeltaLlm, MeanOverPairs) {
  // T and Y centered, uncorrelated, equal variance: Z = T + b Y has IV ratio b.
  std::vector<double> t, y;
  for (int r = 0; r < 2; ++r) {
    for (double v : {1.0, -1.0, 1.0, -1.0}) t.push_back(v);
    for (double v : {1.0, 1.0, -1.0, -1.0}) y.push_back(v);
  }
  std::map<std::string, std::vector<double>> cols{{"T", t}, {"Y", y}};
  const std::vector<double> betas{1.0, 1.2, 1.6};
  for (std::size_t k = 0; k < betas.size(); ++k) {
    std::vector<double> z(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) z[i] = t[i] + betas[k] * y[i];
    cols["Z" + std::to_string(k + 1)] = z;
  }
  ConsistencyReport detail;
  const double d = delta_llm(fixture::panel(cols), tq(), {"Z1", "Z2", "Z3"}, false, &detail);
  EXPECT_NEAR(d, (0.2 + 0.6 + 0.4) / 3.0, 1e-12);
  ASSERT_EQ(detail.pairwise.size(), 3u);
  EXPECT_NEAR(detail.instrument_betas.at("Z2").beta, 1.2, 1e-12);
}

TEST(DeltaLlm, NeedsTwoEstimable) {
  auto data = generate(noisy_scm(3, 200));
  EXPECT_IVLAB_ERROR(delta_llm(data.dataset, tq(), {"Z1"}), ErrorCode::InsufficientInstruments);
  EXPECT_IVLAB_ERROR(delta_llm(data.dataset, tq(), {"Z1", "Z1"}), ErrorCode::InsufficientInstruments);
  EXPECT_IVLAB_ERROR(delta_llm(data.dataset, tq(), {"Z1", "nope"}), ErrorCode::Lookup);
}

TEST(DeltaLlm, ValidPairBeatsLeakyPair) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SCMSpec spec;
    spec.instruments = {InstrumentSpec{}, InstrumentSpec{}, InstrumentSpec{0.8, 0.5, 0.0}};
    spec.n = 10000;
    spec.seed = seed;
    auto data = generate(spec);
    const double valid = delta_llm(data.dataset, tq(), {"Z1", "Z2"});
    const double leaky = delta_llm(data.dataset, tq(), {"Z1", "Z3"});
    if (valid < leaky) ++wins;
  }
  EXPECT_GE(wins, 45);
}

TEST(DeltaRand, SingleDrawAndReproducible) {
  auto data = generate(noisy_scm(4, 300));
  std::mt19937_64 a(9), b(9);
  auto one = delta_rand(data.dataset, tq(), {"Z1", "Z2"}, a, 1);
  ASSERT_EQ(one.samples.size(), 1u);
  EXPECT_EQ(one.median, one.samples[0]);
  std::mt19937_64 c(21), e(21);
  auto x = delta_rand(data.dataset, tq(), {"Z1", "Z2"}, c, 50);
  auto y = delta_rand(data.dataset, tq(), {"Z1", "Z2"}, e, 50);
  EXPECT_EQ(x.samples, y.samples);
  EXPECT_EQ(x.pairs, y.pairs);
  for (const auto& [p, q] : x.pairs) {
    EXPECT_NE(p, q);
    for (const auto& name : {p, q}) {
      EXPECT_TRUE(name != "T" && name != "Y" && name != "Z1" && name != "Z2") << name;
    }
  }
  EXPECT_NEAR(x.median, oracle::median(x.samples), 0.0);
}

TEST(DeltaRand, ExhaustsOnUnestimablePool) {
  std::map<std::string, std::vector<double>> cols;
  for (int i = 0; i < 40; ++i) {
    cols["T"].push_back(i % 5);
    cols["Y"].push_back(i % 3);
    cols["C1"].push_back(1.0);
    cols["C2"].push_back(2.0);
  }
  std::mt19937_64 rng(0);
  EXPECT_IVLAB_ERROR(delta_rand(fixture::panel(cols), tq(), {}, rng, 5), ErrorCode::Exhaustion);
  std::map<std::string, std::vector<double>> small{{"T", {1, 2, 3}}, {"Y", {2, 1, 3}}, {"C1", {1, 3, 2}}};
  EXPECT_IVLAB_ERROR(delta_rand(fixture::panel(small), tq(), {}, rng, 5), ErrorCode::InsufficientInstruments);
}

TEST(DeltaRand, NoiseProxiesLessConsistentThanValidInstruments) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto data = generate(noisy_scm(100 + seed));
    const double llm = delta_llm(data.dataset, tq(), {"Z1", "Z2"});
    std::mt19937_64 rng(seed);
    if (delta_rand(data.dataset, tq(), {"Z1", "Z2"}, rng, 100).median > llm) ++wins;
  }
  EXPECT_GE(wins, 45);
}

TEST(CNorm, Examples) {
  EXPECT_DOUBLE_EQ(c_norm(0.5, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(c_norm(1.0, 1.0), 1.0);
  EXPECT_IVLAB_ERROR(c_norm(1.0, 0.0), ErrorCode::DegenerateBaseline);
  EXPECT_IVLAB_ERROR(c_norm(-1.0, 1.0), ErrorCode::Domain);
}

TEST(CNorm, ValidInstrumentsScoreBelowOne) {
  int below = 0, significant = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto data = generate(noisy_scm(200 + seed));
    ConsistencySettings s;
    s.null_pairs = 200;
    s.seed = seed;
    auto rep = evaluate_consistency(data.dataset, tq(), {"Z1", "Z2"}, s);
    EXPECT_NEAR(rep.c_norm, rep.delta_llm / rep.delta_rand_summary, 1e-12);
    if (rep.c_norm < 1.0) ++below;
    if (rep.p_value < 0.10) ++significant;
  }
  EXPECT_GE(below, 45);
  EXPECT_GE(significant, 40);
}

TEST(CNorm, InvariantToOutcomeScale) {
  auto data = generate(noisy_scm(5, 500));
  auto scaled = data.columns;
  for (auto& v : scaled.at("Y")) v *= 3.7;
  ConsistencySettings s;
  s.null_pairs = 50;
  s.seed = 77;
  auto base = evaluate_consistency(fixture::panel(data.columns), tq(), {"Z1", "Z2"}, s);
  auto big = evaluate_consistency(fixture::panel(scaled), tq(), {"Z1", "Z2"}, s);
  EXPECT_NEAR(big.delta_llm, 3.7 * base.delta_llm, 1e-9 * big.delta_llm);
  EXPECT_NEAR(big.delta_rand_summary, 3.7 * base.delta_rand_summary, 1e-9 * big.delta_rand_summary);
  EXPECT_NEAR(big.c_norm, base.c_norm, 1e-9);
}

TEST(NullDistribution, SmokeAndReproducible) {
  auto data = generate(noisy_scm(6, 300));
  std::mt19937_64 a(3), b(3);
  auto x = null_distribution(data.dataset, tq(), {"Z1", "Z2"}, a, 5);
  auto y = null_distribution(data.dataset, tq(), {"Z1", "Z2"}, b, 5);
  ASSERT_EQ(x.size(), 5u);
  for (double v : x) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0);
  }
  EXPECT_EQ(x, y);
}

TEST(NullDistribution, InvariantUnderRelabeling) {
  auto data = generate(noisy_scm(8, 1000));
  std::map<std::string, std::vector<double>> relabeled;
  for (const auto& [name, v] : data.columns) {
    if (name.starts_with("R")) {
      relabeled["noise_" + std::string(1, char('j' - (std::stoi(name.substr(1)) - 1)))] = v;
    } else {
      relabeled[name] = v;
    }
  }
  std::mt19937_64 a(10), b(10);
  auto x = null_distribution(data.dataset, tq(), {"Z1", "Z2"}, a, 2000);
  auto y = null_distribution(fixture::panel(relabeled), tq(), {"Z1", "Z2"}, b, 2000);
  EXPECT_LT(ks_distance(x, y), 0.1);
}

TEST(EmpiricalP, Examples) {
  const std::vector<double> null{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(empirical_p(0.5, null), 0.2);
  EXPECT_DOUBLE_EQ(empirical_p(10.0, null), 1.0);
  EXPECT_DOUBLE_EQ(empirical_p(2.0, null), 0.6);
  EXPECT_IVLAB_ERROR(empirical_p(1.0, {}), ErrorCode::Domain);
}

TEST(EmpiricalP, MonotoneInObserved) {
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> e;
  std::vector<double> null(300);
  for (auto& v : null) v = e(rng);
  double prev = 0.0;
  for (double obs = 0.0; obs < 6.0; obs += 0.05) {
    const double p = empirical_p(obs, null);
    EXPECT_GE(p, prev);
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, 1.0);
    prev = p;
  }
}
