#include <benchmark/benchmark.h>

#include <map>

#include "disrupt/metrics.hpp"
#include "disrupt/rewire.hpp"
#include "disrupt/synth.hpp"

using namespace disrupt;

namespace {

const CitationGraph& corpus(int works_per_year) {
  static std::map<int, CitationGraph> cache;
  auto it = cache.find(works_per_year);
  if (it == cache.end()) {
    SyntheticSpec spec;
    spec.years = 10;
    spec.works_first_year = works_per_year;
    spec.ref_mean = 10;
    spec.rho = 0.3;
    it = cache.emplace(works_per_year, generate_synthetic(spec, 1).graph).first;
  }
  return it->second;
}

void BM_ComputeAll(benchmark::State& state) {
  const auto& g = corpus(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_all(g, MetricConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.node_count()));
}
BENCHMARK(BM_ComputeAll)->Arg(100)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Rewire(benchmark::State& state) {
  const auto& g = corpus(static_cast<int>(state.range(0)));
  RewireConfig config;
  config.seed = 3;
  std::uint32_t r = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rewire(g, config, r++));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.edge_count()));
}
BENCHMARK(BM_Rewire)->Arg(100)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Ensemble(benchmark::State& state) {
  const auto& g = corpus(500);
  RewireConfig config;
  config.replicates = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_ensemble(g, config, MetricConfig{}));
}
BENCHMARK(BM_Ensemble)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace
