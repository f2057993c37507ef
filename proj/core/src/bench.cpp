#include "spaceiv/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <thread>
#include <tuple>

#include "spaceiv/errors.hpp"
#include "spaceiv/identifiability.hpp"
#include "spaceiv/rng.hpp"
#include "spaceiv/stats.hpp"

namespace spaceiv {

namespace {

// Seed-path tags keep the model and dataset streams disjoint.
constexpr std::uint64_t kModelStream = 0x6d6f64656c;
constexpr std::uint64_t kDataStream = 0x64617461;

FitResult run_method(const std::string& method, const Dataset& data,
                     const Scm& scm, const BenchConfig& cfg) {
  if (method == kMethodSpaceIv) {
    TestConfig tc;
    tc.alpha = cfg.alpha;
    tc.s_max = cfg.s_max;
    tc.stage_estimator = cfg.stage_estimator;
    tc.df_convention = cfg.df_convention;
    return space_iv(data, tc);
  }
  if (method == kMethodOlsSparse) return ols_sparse(data, cfg.s_max);
  if (method == kMethodOracleSize) {
    return oracle_fit(data, scm.parent_set(), OracleMode::KnownSize);
  }
  if (method == kMethodOracleSet) {
    return oracle_fit(data, scm.parent_set(), OracleMode::KnownSet);
  }
  fail(ErrorKind::InvalidArgument, "unknown benchmark method: " + method);
}

}  // namespace

const char* assumption_group_name(AssumptionGroup group) {
  switch (group) {
    case AssumptionGroup::A1AndA3:
      return "A1_and_A3";
    case AssumptionGroup::A1Only:
      return "A1_only";
    case AssumptionGroup::None:
      return "none";
  }
  return "none";
}

AssumptionGroup assumption_group_from_name(const std::string& name) {
  if (name == "A1_and_A3") return AssumptionGroup::A1AndA3;
  if (name == "A1_only") return AssumptionGroup::A1Only;
  if (name == "none") return AssumptionGroup::None;
  fail(ErrorKind::ParseError, "unknown assumption group: " + name);
}

void BenchConfig::validate() const {
  require(d >= 2 && m >= 1, ErrorKind::InvalidArgument,
          "benchmark needs d >= 2 and m >= 1");
  require(q >= 0, ErrorKind::InvalidArgument, "q must be non-negative");
  require(n_models >= 1, ErrorKind::InvalidArgument, "n_models must be >= 1");
  require(!sample_sizes.empty(), ErrorKind::InvalidArgument,
          "sample_sizes must be nonempty");
  require(std::is_sorted(sample_sizes.begin(), sample_sizes.end(),
                         std::less_equal<int>()),
          ErrorKind::InvalidArgument,
          "sample_sizes must be strictly increasing");
  require(sample_sizes.front() > m, ErrorKind::InvalidSampleSize,
          "every sample size must exceed m");
  require(s_max >= 1 && s_max <= d, ErrorKind::InvalidArgument,
          "s_max must lie in [1, d]");
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidArgument,
          "alpha must lie in (0,1)");
  require(!methods.empty(), ErrorKind::InvalidArgument,
          "at least one method required");
}

Scm generate_random_model(const BenchConfig& cfg, std::uint64_t model_seed) {
  Rng rng = make_rng(model_seed);
  std::uniform_real_distribution<double> magnitude(0.5, 1.5);
  std::uniform_int_distribution<int> coin(0, 1);
  const int d = cfg.d;
  const int m = cfg.m;

  // Random causal order via Fisher-Yates.
  std::vector<int> order(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
  for (int i = d - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(pick(rng))]);
  }

  // Fully connected DAG under the order; entries uniform on
  // (-1.5,-0.5) u (0.5,1.5), then each row divided by its max |entry|.
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
  for (int pos_to = 0; pos_to < d; ++pos_to) {
    for (int pos_from = 0; pos_from < pos_to; ++pos_from) {
      const double value = magnitude(rng) * (coin(rng) == 0 ? 1.0 : -1.0);
      b(order[static_cast<std::size_t>(pos_to)],
        order[static_cast<std::size_t>(pos_from)]) = value;
    }
  }
  for (int row = 0; row < d; ++row) {
    const double row_max = b.row(row).cwiseAbs().maxCoeff();
    if (row_max > 0.0) b.row(row) /= row_max;
  }

  // Bernoulli(1/10) instrument pattern with a unit leading diagonal.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, m);
  for (int row = 0; row < d; ++row) {
    for (int col = 0; col < m; ++col) {
      a(row, col) = unit(rng) < 0.1 ? 1.0 : 0.0;
    }
  }
  for (int i = 0; i < std::min(d, m); ++i) a(i, i) = 1.0;

  // Two uniformly chosen coordinates set to one.
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  std::uniform_int_distribution<int> first_pick(0, d - 1);
  const int first = first_pick(rng);
  std::uniform_int_distribution<int> second_pick(0, d - 2);
  int second = second_pick(rng);
  if (second >= first) ++second;
  beta(first) = 1.0;
  beta(second) = 1.0;

  NoiseSpec noise = NoiseSpec::standard(d);
  noise.confounder_dim = cfg.q;
  return Scm(std::move(b), std::move(a), std::move(beta), std::move(noise));
}

AssumptionGroup classify_assumptions(const Scm& scm) {
  const Eigen::MatrixXd c = scm.total_effects();
  const std::vector<int> pa = scm.parent_set();
  const bool a1 = check_a1(c, pa);
  if (!a1) return AssumptionGroup::None;
  const bool a3 = check_a3(c, pa).holds;
  return a3 ? AssumptionGroup::A1AndA3 : AssumptionGroup::A1Only;
}

std::vector<BenchSummaryRow> summarize(const std::vector<BenchRecord>& records) {
  std::map<std::tuple<std::string, int, AssumptionGroup>,
           std::vector<const BenchRecord*>>
      cells;
  for (const BenchRecord& record : records) {
    cells[{record.method, record.n, record.group}].push_back(&record);
  }
  std::vector<BenchSummaryRow> summary;
  for (const auto& [key, cell] : cells) {
    BenchSummaryRow row;
    std::tie(row.method, row.n, row.group) = key;
    std::vector<double> rmse;
    int sparsity_hits = 0;
    int support_hits = 0;
    for (const BenchRecord* record : cell) {
      if (record->ok && std::isfinite(record->rmse)) rmse.push_back(record->rmse);
      sparsity_hits += record->correct_sparsity ? 1 : 0;
      support_hits += record->correct_support ? 1 : 0;
    }
    row.count = static_cast<int>(cell.size());
    if (!rmse.empty()) {
      row.rmse_q25 = stats::quantile_type7(rmse, 0.25);
      row.rmse_median = stats::quantile_type7(rmse, 0.5);
      row.rmse_q75 = stats::quantile_type7(rmse, 0.75);
    } else {
      row.rmse_q25 = row.rmse_median = row.rmse_q75 =
          std::numeric_limits<double>::quiet_NaN();
    }
    row.frac_correct_sparsity =
        static_cast<double>(sparsity_hits) / static_cast<double>(row.count);
    row.frac_correct_support =
        static_cast<double>(support_hits) / static_cast<double>(row.count);
    summary.push_back(row);
  }
  return summary;
}

BenchResult run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  BenchResult result;
  result.config = cfg;

  const int n_models = cfg.n_models;
  const int n_sizes = static_cast<int>(cfg.sample_sizes.size());
  const int n_methods = static_cast<int>(cfg.methods.size());

  result.models.reserve(static_cast<std::size_t>(n_models));
  result.model_groups.resize(static_cast<std::size_t>(n_models));
  for (int id = 0; id < n_models; ++id) {
    result.models.push_back(generate_random_model(
        cfg, derive_seed(cfg.master_seed,
                         {kModelStream, static_cast<std::uint64_t>(id)})));
  }

  // Records land in precomputed slots so the output order is deterministic
  // regardless of which thread produced them.
  result.records.resize(
      static_cast<std::size_t>(n_models * n_sizes * n_methods));

  const unsigned hw = std::thread::hardware_concurrency();
  const int threads =
      cfg.threads > 0 ? cfg.threads : static_cast<int>(hw > 0 ? hw : 1);

  std::atomic<int> next_model{0};
  auto worker = [&] {
    for (;;) {
      const int id = next_model.fetch_add(1);
      if (id >= n_models) return;
      const Scm& scm = result.models[static_cast<std::size_t>(id)];
      const AssumptionGroup group = classify_assumptions(scm);
      result.model_groups[static_cast<std::size_t>(id)] = group;
      const std::vector<int> pa = scm.parent_set();
      const Eigen::VectorXd& beta_star = scm.beta_star();

      for (int si = 0; si < n_sizes; ++si) {
        const int n = cfg.sample_sizes[static_cast<std::size_t>(si)];
        const Dataset data = sample_dataset(
            scm, n,
            derive_seed(cfg.master_seed,
                        {kDataStream, static_cast<std::uint64_t>(id),
                         static_cast<std::uint64_t>(n)}));
        for (int mi = 0; mi < n_methods; ++mi) {
          BenchRecord record;
          record.model_id = id;
          record.group = group;
          record.n = n;
          record.method = cfg.methods[static_cast<std::size_t>(mi)];
          const auto start = std::chrono::steady_clock::now();
          try {
            const FitResult fit = run_method(record.method, data, scm, cfg);
            record.rmse = (beta_star - fit.beta).norm();
            record.correct_sparsity =
                fit.support.size() == pa.size();
            record.correct_support = fit.support == pa;
          } catch (const Error&) {
            record.ok = false;
            record.rmse = std::numeric_limits<double>::quiet_NaN();
          }
          record.wall_time_s =
              std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            start)
                  .count();
          const std::size_t slot = static_cast<std::size_t>(
              (id * n_sizes + si) * n_methods + mi);
          result.records[slot] = std::move(record);
        }
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  result.summary = summarize(result.records);
  return result;
}

std::vector<int> BenchResult::group_counts() const {
  std::vector<int> counts(3, 0);
  for (AssumptionGroup group : model_groups) {
    counts[static_cast<std::size_t>(group)] += 1;
  }
  return counts;
}

}  // namespace spaceiv
