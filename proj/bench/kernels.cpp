// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include "kdvlab/scatter.hpp"
#include "kdvlab/soliton.hpp"

using namespace kdvlab;

namespace {

const SolitonConfig kFive({2.5, 2.0, 1.5, 1.0, 0.5}, {-8.0, -4.0, 0.0, 4.0, 8.0});

void BM_multisoliton_serial(benchmark::State& state) {
  const SpatialGrid grid(40.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eval_multisoliton_serial(kFive, grid));
}

void BM_multisoliton_parallel(benchmark::State& state) {
  const SpatialGrid grid(40.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eval_multisoliton(kFive, grid));
}

void BM_transmission_serial(benchmark::State& state) {
  const auto u = eval_multisoliton(SolitonConfig({2.0, 1.0}, {0.0, 0.0}), SpatialGrid());
  const auto frequencies = make_frequency_grid(20.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(transmission_reciprocal_serial(u, frequencies));
}

void BM_transmission_parallel(benchmark::State& state) {
  const auto u = eval_multisoliton(SolitonConfig({2.0, 1.0}, {0.0, 0.0}), SpatialGrid());
  const auto frequencies = make_frequency_grid(20.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(transmission_reciprocal(u, frequencies));
}

}  // namespace

BENCHMARK(BM_multisoliton_serial)->Arg(2048)->Arg(16384)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_multisoliton_parallel)->Arg(2048)->Arg(16384)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_transmission_serial)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_transmission_parallel)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
