#include <benchmark/benchmark.h>

#include <random>

#include "blockweave/checks.hpp"
#include "blockweave/engine.hpp"
#include "blockweave/error.hpp"
#include "fixtures.hpp"
#include "generators.hpp"

namespace {

const bw::Library& library() {
  static const auto lib = bw::testing::fixture_library();
  return *lib;
}

// Full batch check over synthetic designs of growing size; edges = 1.5 x instances.
void BM_CheckDesign(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = bw::testing::synthetic_design(library(), n, n * 3 / 2, 613);
  for (auto _ : state) benchmark::DoNotOptimize(bw::check_design(d, library()));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CheckDesign)->RangeMultiplier(2)->Range(20, 320)->Unit(benchmark::kMicrosecond)->Complexity();

// One random op applied to an engine and its delta computed.
void BM_EngineApply(benchmark::State& state) {
  std::mt19937 rng(7);
  bw::Engine e(library(), "bench");
  for (auto _ : state) {
    bw::Op op = bw::testing::random_op(e, rng, {60, 120});
    try {
      benchmark::DoNotOptimize(e.apply(op));
    } catch (const bw::Error&) {
    }
  }
}
BENCHMARK(BM_EngineApply)->Unit(benchmark::kMicrosecond);

void BM_LoadThermostat(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bw::testing::fixture_engine(library(), "thermostat"));
}
BENCHMARK(BM_LoadThermostat)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
