#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "ivlab/preselect.hpp"

using namespace ivlab;

namespace {

PanelDataset noisy_fixture(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::map<std::string, std::vector<double>> cols;
  for (int i = 0; i < 200; ++i) {
    const double v = n(rng);
    cols["v"].push_back(v);
    cols["u"].push_back(2.0 * v + 0.1 * n(rng));
    cols["n1"].push_back(n(rng));
    cols["n2"].push_back(n(rng));
    cols["n3"].push_back(n(rng));
  }
  return fixture::panel(cols);
}

}  // namespace

TEST(Preselect, FindsPlantedPair) {
  auto d = noisy_fixture(1);
  std::vector<std::string> names{"n1", "n2", "n3", "u", "v"};
  for (const auto& a : names) {
    for (const auto& b : names) {
      if (a >= b || (a == "u" && b == "v")) continue;
      EXPECT_LT(std::abs(pearson_correlation(align_pair(d, a, b))), 0.7) << a << "," << b;
    }
  }
  auto out = preselect(d, 0.7, 30);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].a, "u");
  EXPECT_EQ(out[0].b, "v");
  EXPECT_EQ(out[0].n, 200u);
}

TEST(Preselect, HighThresholdIsEmpty) { EXPECT_TRUE(preselect(noisy_fixture(2), 0.999, 30).empty()); }

TEST(Preselect, PlantedCorrelationAtTableSize) {
  // gdp and health with rho 0.902 over 2784 complete cases.
  const double rho = 0.902;
  std::mt19937_64 rng(2784);
  std::normal_distribution<double> n;
  std::map<std::string, std::vector<double>> cols;
  for (int i = 0; i < 2784; ++i) {
    const double g = n(rng);
    cols["gdp"].push_back(g);
    cols["health"].push_back(rho * g + std::sqrt(1 - rho * rho) * n(rng));
  }
  auto out = preselect(fixture::panel(cols), 0.7, 30);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].n, 2784u);
  EXPECT_NEAR(out[0].rho, rho, 0.01);
}

TEST(Preselect, InvariantsOverThresholds) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  std::map<std::string, std::vector<double>> cols;
  for (int i = 0; i < 60; ++i) {
    const double base = n(rng);
    for (int k = 0; k < 6; ++k) {
      auto& col = cols["x" + std::to_string(k)];
      col.push_back(base * (k * 0.3) + n(rng));
    }
  }
  // Knock out some cells so pair sizes differ.
  ivlab::PanelDataset::Builder b;
  for (const auto& [name, v] : cols) {
    b.add_variable({name, "", ""});
    for (std::size_t i = 0; i < v.size(); ++i) {
      if ((i + name.back()) % 7 == 0 && name != "x0") continue;
      b.add_observation("e", static_cast<int>(i), name, v[i]);
    }
  }
  auto d = std::move(b).build();

  auto key = [](const PairCandidate& p) { return p.a + "|" + p.b; };
  std::set<std::string> prev;
  bool first = true;
  for (double tau : {0.1, 0.3, 0.5, 0.7}) {
    auto out = preselect(d, tau, 10);
    std::set<std::string> now;
    for (const auto& p : out) {
      EXPECT_LT(p.a, p.b);
      now.insert(key(p));
      EXPECT_FALSE(now.contains(p.b + "|" + p.a));
    }
    if (!first) {
      for (const auto& k : now) EXPECT_TRUE(prev.contains(k)) << k;
    }
    prev = now;
    first = false;
  }
  std::size_t last = preselect(d, 0.1, 1).size();
  for (std::size_t n_min : {10u, 52u, 55u, 60u, 61u}) {
    const std::size_t size = preselect(d, 0.1, n_min).size();
    EXPECT_LE(size, last);
    last = size;
  }
  EXPECT_EQ(last, 0u);
}
