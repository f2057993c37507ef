#include <benchmark/benchmark.h>

#include "spaceiv/bench.hpp"
#include "spaceiv/graph.hpp"
#include "spaceiv/identifiability.hpp"

namespace {

using namespace spaceiv;

CausalGraph protocol_graph() {
  BenchConfig cfg;
  return CausalGraph::from_scm(generate_random_model(cfg, 7));
}

void bm_disjoint_paths(benchmark::State& state) {
  const CausalGraph g = protocol_graph();
  std::vector<int> sources;
  for (int k = 0; k < g.m(); ++k) sources.push_back(k);
  const std::vector<int> targets = g.parents_of_response();
  for (auto _ : state) {
    benchmark::DoNotOptimize(max_node_disjoint_paths(g, sources, targets));
  }
}
BENCHMARK(bm_disjoint_paths);

void bm_b_conditions(benchmark::State& state) {
  const CausalGraph g = protocol_graph();
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_b_conditions(g));
  }
}
BENCHMARK(bm_b_conditions);

void bm_classify_assumptions(benchmark::State& state) {
  BenchConfig cfg;
  const Scm scm = generate_random_model(cfg, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(classify_assumptions(scm));
  }
}
BENCHMARK(bm_classify_assumptions);

void bm_marginalize(benchmark::State& state) {
  const CausalGraph g = protocol_graph();
  const std::vector<int> keep = g.parents_of_response();
  for (auto _ : state) {
    benchmark::DoNotOptimize(marginalize(g, keep));
  }
}
BENCHMARK(bm_marginalize);

}  // namespace

BENCHMARK_MAIN();
