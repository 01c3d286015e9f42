#include <gtest/gtest.h>

#include <boost/math/distributions/fisher_f.hpp>
#include <random>

#include "fixtures.hpp"
#include "ivlab/granger.hpp"
#include "ivlab/scm.hpp"
#include "oracles.hpp"

using namespace ivlab;

TEST(Granger, DeterministicLeadLag) {
  LaggedSpec spec;
  spec.effect_ar = 0.0;
  spec.gamma = 1.0;
  spec.effect_sd = 0.0;
  spec.n = 100;
  auto d = generate_lagged(spec);
  auto r = granger_test(d.x, d.y, 1);
  EXPECT_NEAR(r.rss_unrestricted, 0.0, 1e-18);
  EXPECT_LT(r.p_value, 1e-6);
}

TEST(Granger, TooShort) {
  std::vector<double> x(12, 0.0), y(12, 0.0);
  for (std::size_t i = 0; i < 12; ++i) {
    x[i] = static_cast<double>(i % 3);
    y[i] = static_cast<double>(i % 5);
  }
  EXPECT_IVLAB_ERROR(granger_test(x, y, 1), ErrorCode::InsufficientData);
}

TEST(Granger, RestrictedRssNeverBelowUnrestricted) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    LaggedSpec spec;
    spec.gamma = seed % 2 ? 0.0 : 0.3;
    spec.n = 80;
    spec.seed = seed;
    auto d = generate_lagged(spec);
    for (int lag = 1; lag <= 3; ++lag) {
      auto r = granger_test(d.x, d.y, lag);
      EXPECT_LE(r.rss_unrestricted, r.rss_restricted);
    }
  }
}

TEST(Granger, PValueAgreesWithTabulatedCriticalValues) {
  // With lag 1 the statistic is F(1, n - 3). At the tabulated 5% point the
  // library's upper tail must be 0.05.
  for (int d : {10, 30, 60, 120}) {
    boost::math::fisher_f_distribution<double> f(1, d);
    EXPECT_NEAR(boost::math::cdf(boost::math::complement(f, oracle::f_crit_05_df1(d))), 0.05, 5e-4);
  }
  LaggedSpec spec;
  spec.gamma = 0.2;
  spec.n = 64;  // 63 usable rows -> df_den = 63 - 2 - 1
  spec.seed = 4;
  auto data = generate_lagged(spec);
  auto r = granger_test(data.x, data.y, 1);
  ASSERT_EQ(r.df_den, 60);
  EXPECT_EQ(r.p_value < 0.05, r.f_stat > oracle::f_crit_05_df1(60));
  const double f_oracle = (r.rss_restricted - r.rss_unrestricted) / (r.rss_unrestricted / 60.0);
  EXPECT_NEAR(r.f_stat, f_oracle, 1e-9 * f_oracle + 1e-12);
}

TEST(Granger, NullCalibration) {
  int rejections = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    LaggedSpec spec;
    spec.effect_ar = 0.0;
    spec.gamma = 0.0;
    spec.n = 200;
    spec.seed = seed;
    auto d = generate_lagged(spec);
    if (granger_test(d.x, d.y, 1).p_value < 0.05) ++rejections;
  }
  EXPECT_NEAR(rejections / 500.0, 0.05, 0.03);
}

TEST(Granger, Power) {
  int rejections = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    LaggedSpec spec;
    spec.n = 300;
    spec.seed = 1000 + seed;
    auto d = generate_lagged(spec);
    if (granger_test(d.x, d.y, 1).p_value < 0.05) ++rejections;
  }
  EXPECT_GE(rejections, 95);
}

TEST(Granger, PanelPoolsWithinEntity) {
  LaggedSpec spec;
  spec.entities = 5;
  spec.n = 40;
  spec.seed = 8;
  auto d = generate_lagged(spec);
  auto r = granger_test(d.dataset, "x", "y", 1);
  EXPECT_EQ(r.n, 5u * 39u);
  EXPECT_LT(r.p_value, 0.05);
  const int lag = select_lag_aic(d.dataset, "x", "y", 4);
  EXPECT_GE(lag, 1);
  EXPECT_LE(lag, 4);
}

TEST(Granger, UnitRootWarning) {
  LaggedSpec spec;
  spec.cause_ar = 0.99;
  spec.n = 400;
  spec.burn_in = 0;
  auto d = generate_lagged(spec);
  EXPECT_TRUE(granger_test(d.x, d.y, 1).stationarity_warning);
}
