#include <benchmark/benchmark.h>

#include "spaceiv/bench.hpp"
#include "spaceiv/estimators.hpp"
#include "spaceiv/scm.hpp"

namespace {

using namespace spaceiv;

Dataset protocol_dataset(int n) {
  BenchConfig cfg;
  const Scm scm = generate_random_model(cfg, 7);
  return sample_dataset(scm, n, 11);
}

void bm_space_iv(benchmark::State& state) {
  const Dataset data = protocol_dataset(static_cast<int>(state.range(0)));
  TestConfig cfg;
  cfg.alpha = 1e-6;  // force the full three-level sweep
  for (auto _ : state) {
    benchmark::DoNotOptimize(space_iv(data, cfg));
  }
}
BENCHMARK(bm_space_iv)->Arg(400)->Arg(1600);

void bm_space_iv_tsls(benchmark::State& state) {
  const Dataset data = protocol_dataset(static_cast<int>(state.range(0)));
  TestConfig cfg;
  cfg.alpha = 1e-6;
  cfg.stage_estimator = StageEstimator::Tsls;
  for (auto _ : state) {
    benchmark::DoNotOptimize(space_iv(data, cfg));
  }
}
BENCHMARK(bm_space_iv_tsls)->Arg(1600);

void bm_liml_single(benchmark::State& state) {
  const Dataset data = protocol_dataset(1600);
  const Eigen::MatrixXd x_s = data.x.leftCols(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(liml(x_s, data.y, data.inst));
  }
}
BENCHMARK(bm_liml_single);

void bm_ar_statistic(benchmark::State& state) {
  const Dataset data = protocol_dataset(1600);
  const Eigen::VectorXd beta = Eigen::VectorXd::Zero(data.d());
  for (auto _ : state) {
    benchmark::DoNotOptimize(ar_statistic(data.x, data.y, data.inst, beta));
  }
}
BENCHMARK(bm_ar_statistic);

void bm_sample_dataset(benchmark::State& state) {
  BenchConfig cfg;
  const Scm scm = generate_random_model(cfg, 7);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sample_dataset(scm, static_cast<int>(state.range(0)), ++seed));
  }
}
BENCHMARK(bm_sample_dataset)->Arg(1600);

}  // namespace

BENCHMARK_MAIN();
