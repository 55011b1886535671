// Serial reference vs OpenMP kernel for each parallel entry point.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <vector>

#include "surgekit/averaging.hpp"
#include "surgekit/control.hpp"
#include "surgekit/ode.hpp"
#include "surgekit/stability.hpp"

using namespace surgekit;

namespace {

const CompressorMap kMap;

template <bool Parallel>
void BM_StabilityScan(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto rows = Parallel ? stability_scan(kMap, 0.01, 0.79, n) : serial::stability_scan(kMap, 0.01, 0.79, n);
    benchmark::DoNotOptimize(rows.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_VectorField(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto f = Parallel ? vector_field_grid(kMap, 0.55, {0.05, 0.75}, {0.1, 0.9}, n)
                      : serial::vector_field_grid(kMap, 0.55, {0.05, 0.75}, {0.1, 0.9}, n);
    benchmark::DoNotOptimize(f.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <bool Parallel>
void BM_AveragingVerdict(benchmark::State& state) {
  const auto grid = averaging_grid(0.1, 50, 0.1, 50, static_cast<std::size_t>(state.range(0)), AveragedPoint{});
  for (auto _ : state) {
    auto rows = Parallel ? stability_verdict(grid) : serial::stability_verdict(grid);
    benchmark::DoNotOptimize(rows.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}

template <bool Parallel>
void BM_ScenarioBatch(benchmark::State& state) {
  std::vector<ClosedLoopScenario> batch;
  for (int i = 0; i < state.range(0); ++i) {
    ClosedLoopScenario c;
    c.disturbance.target = 0.3 + 0.35 * i / static_cast<double>(state.range(0));
    c.t_end = 10.0;
    batch.push_back(c);
  }
  for (auto _ : state) {
    auto t = Parallel ? simulate_batch(batch) : serial::simulate_batch(batch);
    benchmark::DoNotOptimize(t.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_StabilityScan<false>)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StabilityScan<true>)->Arg(100000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_VectorField<false>)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VectorField<true>)->Arg(400)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AveragingVerdict<false>)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AveragingVerdict<true>)->Arg(300)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ScenarioBatch<false>)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScenarioBatch<true>)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
