#include <benchmark/benchmark.h>

#include <cmath>

#include "riskclt/asymptotics.hpp"
#include "riskclt/distributions.hpp"
#include "riskclt/risk_measures.hpp"

namespace {

riskclt::SampleSet reference_sample(std::int64_t n) {
  return riskclt::sample(riskclt::DistributionSpec::normal(10.0, std::sqrt(3.0), static_cast<std::size_t>(n), 1));
}

void BM_EstimateAVaR(benchmark::State& state) {
  const auto s = reference_sample(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(riskclt::estimate_avar(s, 0.05));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EstimateAVaR)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity();

void BM_EstimateHigherOrder(benchmark::State& state) {
  const auto s = reference_sample(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(riskclt::estimate_higher_order(s, 2.0, 20.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EstimateHigherOrder)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity();

void BM_EstimateSemideviation(benchmark::State& state) {
  const auto s = reference_sample(state.range(0));
  const auto spec = riskclt::MeasureSpec::semideviation(2.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(riskclt::estimate(spec, s));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EstimateSemideviation)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity();

void BM_LimitSdHigherOrder(benchmark::State& state) {
  const auto s = reference_sample(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(riskclt::limit_sd_higher_order(s, 2.0, 20.0));
}
BENCHMARK(BM_LimitSdHigherOrder)->Arg(4000)->Arg(100000);

void BM_LimitSdSemideviation(benchmark::State& state) {
  const auto s = reference_sample(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(riskclt::limit_sd_semideviation(s, 2.0, 0.5));
}
BENCHMARK(BM_LimitSdSemideviation)->Arg(4000)->Arg(100000);

void BM_OracleHigherOrder(benchmark::State& state) {
  const auto spec = riskclt::DistributionSpec::normal(10.0, std::sqrt(3.0));
  for (auto _ : state) benchmark::DoNotOptimize(riskclt::oracle_higher_order(spec, 2.0, 20.0));
}
BENCHMARK(BM_OracleHigherOrder)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
