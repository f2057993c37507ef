#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spaceiv/estimators.hpp"
#include "spaceiv/scm.hpp"

namespace spaceiv {

inline constexpr const char* kMethodSpaceIv = "spaceIV";
inline constexpr const char* kMethodOlsSparse = "OLS-sparse";
inline constexpr const char* kMethodOracleSize = "oracle-size";
inline constexpr const char* kMethodOracleSet = "oracle-set";

enum class AssumptionGroup { A1AndA3, A1Only, None };

const char* assumption_group_name(AssumptionGroup group);
AssumptionGroup assumption_group_from_name(const std::string& name);

struct BenchConfig {
  int d = 20;
  int m = 10;
  int q = 1;
  int n_models = 200;
  std::vector<int> sample_sizes = {50, 100, 200, 400, 800, 1600};
  int s_max = 3;
  double alpha = 0.05;
  std::vector<std::string> methods = {kMethodSpaceIv, kMethodOlsSparse,
                                      kMethodOracleSize, kMethodOracleSet};
  StageEstimator stage_estimator = StageEstimator::Liml;
  DfConvention df_convention = DfConvention::MThenNm;
  std::uint64_t master_seed = 12;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct BenchRecord {
  int model_id = 0;
  AssumptionGroup group = AssumptionGroup::None;
  int n = 0;
  std::string method;
  double rmse = 0.0;
  bool correct_sparsity = false;
  bool correct_support = false;
  double wall_time_s = 0.0;
  bool ok = true;  // false when the fit threw; rmse is NaN then
};

struct BenchSummaryRow {
  std::string method;
  int n = 0;
  AssumptionGroup group = AssumptionGroup::None;
  int count = 0;
  double rmse_q25 = 0.0;
  double rmse_median = 0.0;
  double rmse_q75 = 0.0;
  double frac_correct_sparsity = 0.0;
  double frac_correct_support = 0.0;
};

struct BenchResult {
  BenchConfig config;
  std::vector<Scm> models;
  std::vector<AssumptionGroup> model_groups;
  std::vector<BenchRecord> records;
  std::vector<BenchSummaryRow> summary;

  std::vector<int> group_counts() const;  // [A1AndA3, A1Only, None]
};

// One random model of the experiment protocol: a fully connected random
// causal order with row-rescaled coefficients, sparse Bernoulli instrument
// matrix with unit leading diagonal, a 2-sparse unit causal coefficient and
// standard Gaussian noise.
Scm generate_random_model(const BenchConfig& cfg, std::uint64_t model_seed);

// Group by which of (A1), (A3) hold for the population total-effect matrix.
AssumptionGroup classify_assumptions(const Scm& scm);

// Full protocol: per model and sample size run every configured method.
// Seeds are derived per (master_seed, model_id, n), so results do not depend
// on execution order or thread count.
BenchResult run_benchmark(const BenchConfig& cfg);

std::vector<BenchSummaryRow> summarize(const std::vector<BenchRecord>& records);

}  // namespace spaceiv
