#include <benchmark/benchmark.h>

#include "ivlab/granger.hpp"
#include "ivlab/regression.hpp"
#include "ivlab/scm.hpp"

namespace {

ivlab::SCMData scm(std::size_t n) {
  ivlab::SCMSpec spec;
  spec.n = n;
  spec.seed = 1;
  return ivlab::generate(spec);
}

void BM_Ols(benchmark::State& state) {
  const auto data = scm(static_cast<std::size_t>(state.range(0)));
  const auto& c = data.columns;
  const auto X = ivlab::design_with_intercept(std::vector<std::vector<double>>{c.at("T"), c.at("Z1")});
  const auto y = ivlab::to_vector(c.at("Y"));
  for (auto _ : state) benchmark::DoNotOptimize(ivlab::ols(y, X));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Ols)->RangeMultiplier(10)->Range(100, 100000)->Complexity();

void BM_TwoStageLeastSquares(benchmark::State& state) {
  const auto data = scm(static_cast<std::size_t>(state.range(0)));
  const auto& c = data.columns;
  for (auto _ : state) benchmark::DoNotOptimize(ivlab::two_stage_least_squares(c.at("Y"), c.at("T"), c.at("Z1")));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TwoStageLeastSquares)->RangeMultiplier(10)->Range(100, 100000)->Complexity();

void BM_Granger(benchmark::State& state) {
  ivlab::LaggedSpec spec;
  spec.n = static_cast<std::size_t>(state.range(0));
  const auto data = ivlab::generate_lagged(spec);
  const int lag = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(ivlab::granger_test(data.x, data.y, lag));
}
BENCHMARK(BM_Granger)->ArgsProduct({{300, 3000, 30000}, {1, 4}});

}  // namespace
