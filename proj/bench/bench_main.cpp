#include <benchmark/benchmark.h>

#include "mixrate/estimator.hpp"
#include "mixrate/experiments.hpp"
#include "mixrate/hard_instances.hpp"
#include "mixrate/parallel.hpp"

using namespace mixrate;

namespace {

const GaussianLocationFamily gauss;
const MixingDistribution truth({{0.8, -1.0}, {0.2, 4.0}});

void BM_KsSerial(benchmark::State &state) {
  const EmpiricalCDF ecdf(sample(gauss, truth, static_cast<std::size_t>(state.range(0)), 1));
  for (auto _ : state) benchmark::DoNotOptimize(serial::ks_distance(gauss, truth.atoms(), ecdf));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_KsParallel(benchmark::State &state) {
  const EmpiricalCDF ecdf(sample(gauss, truth, static_cast<std::size_t>(state.range(0)), 1));
  for (auto _ : state)
    benchmark::DoNotOptimize(ks_distance(gauss, truth.atoms(), ecdf, Execution::parallel));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DkwReplicates(benchmark::State &state) {
  const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  for (auto _ : state) benchmark::DoNotOptimize(dkw_calibration(10000, 200, 3, nullptr, std::nullopt, exec));
}

void BM_LanReplicates(benchmark::State &state) {
  LanConfig cfg;
  cfg.family = std::make_shared<GaussianLocationFamily>();
  cfg.reps = 200;
  cfg.n = 4096;
  const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  for (auto _ : state) benchmark::DoNotOptimize(lan_simulate(cfg, exec));
}

} // namespace

BENCHMARK(BM_KsSerial)->RangeMultiplier(8)->Range(1 << 9, 1 << 18);
BENCHMARK(BM_KsParallel)->RangeMultiplier(8)->Range(1 << 9, 1 << 18);
BENCHMARK(BM_DkwReplicates)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LanReplicates)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
