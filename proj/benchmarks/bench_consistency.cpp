#include <benchmark/benchmark.h>

#include <random>

#include "ivlab/consistency.hpp"
#include "ivlab/scm.hpp"

namespace {

// Pool size drives the beta cache; sample size drives each 2SLS fit.
void BM_NullDistribution(benchmark::State& state) {
  ivlab::SCMSpec spec;
  spec.instruments = {ivlab::InstrumentSpec{}, ivlab::InstrumentSpec{}};
  spec.noise_variables = static_cast<std::size_t>(state.range(0));
  spec.n = static_cast<std::size_t>(state.range(1));
  const auto data = ivlab::generate(spec);
  const ivlab::CausalQuery q{"T", "Y", ""};
  for (auto _ : state) {
    std::mt19937_64 rng(7);
    benchmark::DoNotOptimize(ivlab::null_distribution(data.dataset, q, {"Z1", "Z2"}, rng, 2000));
  }
}
BENCHMARK(BM_NullDistribution)->ArgsProduct({{10, 40}, {500, 5000}})->Unit(benchmark::kMillisecond);

void BM_EvaluateConsistency(benchmark::State& state) {
  ivlab::SCMSpec spec;
  spec.instruments = {ivlab::InstrumentSpec{}, ivlab::InstrumentSpec{}, ivlab::InstrumentSpec{}};
  spec.noise_variables = 20;
  spec.n = static_cast<std::size_t>(state.range(0));
  const auto data = ivlab::generate(spec);
  ivlab::ConsistencySettings settings;
  settings.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ivlab::evaluate_consistency(data.dataset, {"T", "Y", ""}, {"Z1", "Z2", "Z3"}, settings));
  }
}
BENCHMARK(BM_EvaluateConsistency)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
