#include <benchmark/benchmark.h>

#include "blockweave/board.hpp"
#include "blockweave/composer.hpp"
#include "blockweave/pipeline.hpp"
#include "fixtures.hpp"

namespace {

struct Prepared {
  std::unique_ptr<bw::Library> lib = bw::testing::fixture_library();
  bw::Design design = bw::testing::fixture_design("router20");
  bw::MergedNetlist netlist = bw::compose_schematic(design, *lib);
  bw::BoardLayout layout = bw::build_layout(design, *lib);
  std::vector<bw::RatsnestLink> links = bw::ratsnest(design, netlist, layout);
};

const Prepared& prepared() {
  static const Prepared p;
  return p;
}

void BM_Ratsnest(benchmark::State& state) {
  const auto& p = prepared();
  for (auto _ : state) benchmark::DoNotOptimize(bw::ratsnest(p.design, p.netlist, p.layout));
}
BENCHMARK(BM_Ratsnest)->Unit(benchmark::kMicrosecond);

void BM_RouteRouter20(benchmark::State& state) {
  const auto& p = prepared();
  for (auto _ : state) benchmark::DoNotOptimize(bw::route(p.layout, p.links));
  state.counters["links"] = static_cast<double>(p.links.size());
}
BENCHMARK(BM_RouteRouter20)->Unit(benchmark::kMillisecond);

void BM_ComposeRouter20(benchmark::State& state) {
  const auto& p = prepared();
  for (auto _ : state) benchmark::DoNotOptimize(bw::compose_design(p.design, *p.lib));
}
BENCHMARK(BM_ComposeRouter20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
