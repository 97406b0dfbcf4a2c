#include <benchmark/benchmark.h>

#include <random>

#include "blockweave/annotation.hpp"
#include "generators.hpp"

namespace {

std::vector<std::string> corpus() {
  std::mt19937 rng(11);
  std::vector<std::string> out;
  for (int i = 0; i < 1000; ++i) out.push_back(bw::render_annotation(bw::testing::random_annotation(rng)));
  return out;
}

void BM_ParseAnnotation(benchmark::State& state) {
  static const auto texts = corpus();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bw::parse_annotation(texts[i]));
    i = (i + 1) % texts.size();
  }
}
BENCHMARK(BM_ParseAnnotation);

void BM_RoundTrip(benchmark::State& state) {
  static const auto texts = corpus();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bw::render_annotation(bw::parse_annotation(texts[i])));
    i = (i + 1) % texts.size();
  }
}
BENCHMARK(BM_RoundTrip);

}  // namespace

BENCHMARK_MAIN();
