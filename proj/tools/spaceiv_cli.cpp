// Command-line surface: model simulation, identifiability checks, subset
// search fits and the randomized benchmark protocol.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spaceiv/bench.hpp"
#include "spaceiv/errors.hpp"
#include "spaceiv/estimators.hpp"
#include "spaceiv/graph.hpp"
#include "spaceiv/identifiability.hpp"
#include "spaceiv/serialize.hpp"

namespace {

using spaceiv::Error;
using spaceiv::ErrorKind;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  spaceiv::require(in.good(), ErrorKind::IoError, "cannot open: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content << "\n";
    return;
  }
  std::ofstream out(path);
  spaceiv::require(out.good(), ErrorKind::IoError, "cannot write: " + path);
  out << content << "\n";
}

struct CheckArgs {
  std::string input;
  bool graphical = false;
  bool exhaustive = false;
  int monte_carlo = 0;
  int s_max = -1;
  double zero_tol = spaceiv::kZeroTol;
  double rank_tol = spaceiv::linalg::kDefaultRankTol;
  std::uint64_t seed = 1;
  bool force = false;
  std::string out;
  std::string dot_out;
};

int run_check(const CheckArgs& args) {
  const std::string text = read_file(args.input);
  const nlohmann::json probe =
      nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  spaceiv::require(!probe.is_discarded(), ErrorKind::ParseError,
                   "input is not valid JSON: " + args.input);
  const bool is_graph_file = !probe.contains("B");

  std::optional<spaceiv::Scm> scm;
  std::optional<spaceiv::CausalGraph> graph;
  if (is_graph_file) {
    graph = spaceiv::graph_from_json(text);
  } else {
    scm = spaceiv::scm_from_json(text);
    graph = spaceiv::CausalGraph::from_scm(*scm, args.zero_tol);
  }

  nlohmann::json output;
  if (args.graphical) {
    spaceiv::BCheckOptions opts;
    opts.force = args.force;
    opts.exhaustive = args.exhaustive;
    const spaceiv::GraphReport report =
        spaceiv::check_b_conditions(*graph, opts);
    output = nlohmann::json::parse(spaceiv::graph_report_to_json(report, -1));
  } else {
    spaceiv::require(scm.has_value(), ErrorKind::InvalidArgument,
                     "algebraic checks need a model file with coefficients; "
                     "pass --graphical for a graph file");
    const spaceiv::IdentReport report = spaceiv::check_identifiability(
        *scm, args.s_max, args.rank_tol, args.force);
    output = nlohmann::json::parse(spaceiv::ident_report_to_json(report, -1));
  }
  if (args.monte_carlo > 0) {
    const spaceiv::GenericityResult mc = spaceiv::genericity_check(
        *graph, args.monte_carlo, args.seed, args.rank_tol);
    output["monte_carlo"] = {
        {"draws", mc.draws},
        {"a1_fraction", static_cast<double>(mc.a1_count) / mc.draws},
        {"a3_fraction", static_cast<double>(mc.a3_count) / mc.draws},
        {"a1_a3_fraction", static_cast<double>(mc.both_count) / mc.draws},
    };
  }
  if (!args.dot_out.empty()) {
    write_output(args.dot_out, spaceiv::graph_to_dot(*graph));
  }
  write_output(args.out, output.dump(2));
  return 0;
}

std::vector<int> parse_sizes(const std::string& csv) {
  std::vector<int> sizes;
  std::stringstream stream(csv);
  std::string token;
  while (std::getline(stream, token, ',')) {
    try {
      sizes.push_back(std::stoi(token));
    } catch (const std::exception&) {
      spaceiv::fail(ErrorKind::ParseError, "bad sample size: " + token);
    }
  }
  return sizes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse causal effect estimation in linear IV models"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Sample a dataset from a model JSON and write CSV");
  std::string sim_model, sim_out;
  int sim_n = 1000;
  std::uint64_t sim_seed = 1;
  simulate->add_option("--model", sim_model, "model JSON file")->required();
  simulate->add_option("--n", sim_n, "number of observations")->required();
  simulate->add_option("--seed", sim_seed, "RNG seed");
  simulate->add_option("--out", sim_out, "output CSV path (default stdout)");

  // check
  auto* check = app.add_subcommand(
      "check", "Identifiability checks for a model or graph JSON");
  CheckArgs check_args;
  check->add_option("input", check_args.input, "model or graph JSON file")
      ->required();
  check->add_flag("--graphical", check_args.graphical,
                  "run the graphical (B) conditions instead of the algebraic "
                  "(A) conditions");
  check->add_flag("--exhaustive", check_args.exhaustive,
                  "enumerate all violating sets instead of stopping early");
  check->add_option("--monte-carlo", check_args.monte_carlo,
                    "validate genericity with R random coefficient draws");
  check->add_option("--smax", check_args.s_max,
                    "largest support size for the non-cancellation sweep");
  check->add_option("--zero-tol", check_args.zero_tol,
                    "coefficient magnitude below which no edge is drawn");
  check->add_option("--rank-tol", check_args.rank_tol,
                    "relative singular-value tolerance");
  check->add_option("--seed", check_args.seed, "seed for --monte-carlo");
  check->add_flag("--force", check_args.force,
                  "override combinatorial size guards");
  check->add_option("--out", check_args.out, "output JSON path (default stdout)");
  check->add_option("--dot", check_args.dot_out, "also write a DOT rendering");

  // fit
  auto* fit = app.add_subcommand("fit", "Run the sparse subset search on a CSV");
  std::string fit_data, fit_out;
  double fit_alpha = 0.05;
  int fit_smax = 3;
  std::string fit_estimator = "liml";
  std::string fit_df = "m_then_nm";
  bool fit_center = false;
  bool fit_test_empty = false;
  fit->add_option("--data", fit_data, "dataset CSV file")->required();
  fit->add_option("--alpha", fit_alpha, "test level");
  fit->add_option("--smax", fit_smax, "sparsity cap");
  fit->add_option("--estimator", fit_estimator, "liml or tsls");
  fit->add_option("--df-convention", fit_df, "m_then_nm or nm_then_m");
  fit->add_flag("--center", fit_center, "center columns before fitting");
  fit->add_flag("--test-empty", fit_test_empty,
                "also test the empty support before s = 1");
  fit->add_option("--out", fit_out, "output JSON path (default stdout)");

  // subset
  auto* subset = app.add_subcommand(
      "subset", "Intersection of accepted supports (parent subset recovery)");
  std::string subset_data, subset_out;
  std::string subset_mode = "minimal";
  int subset_size = -1;
  double subset_alpha = 0.05;
  int subset_smax = 3;
  std::string subset_estimator = "liml";
  std::string subset_df = "m_then_nm";
  subset->add_option("--data", subset_data, "dataset CSV file")->required();
  subset->add_option("--mode", subset_mode, "fixed or minimal");
  subset->add_option("--size", subset_size, "support size for fixed mode");
  subset->add_option("--alpha", subset_alpha, "test level");
  subset->add_option("--smax", subset_smax, "sparsity cap for minimal mode");
  subset->add_option("--estimator", subset_estimator, "liml or tsls");
  subset->add_option("--df-convention", subset_df, "m_then_nm or nm_then_m");
  subset->add_option("--out", subset_out, "output JSON path (default stdout)");

  // bench
  auto* bench = app.add_subcommand(
      "bench", "Randomized benchmark protocol; writes CSV tables");
  std::string bench_config, bench_out_dir, bench_sizes, bench_estimator,
      bench_df;
  std::optional<int> bench_models;
  std::optional<double> bench_alpha;
  std::optional<int> bench_smax;
  std::optional<std::uint64_t> bench_seed;
  std::optional<int> bench_threads;
  bool bench_full = false;
  bench->add_option("--config", bench_config, "BenchConfig JSON file");
  bench->add_option("--out", bench_out_dir, "output directory")->required();
  bench->add_option("--models", bench_models, "number of random models");
  bench->add_option("--sizes", bench_sizes, "comma-separated sample sizes");
  bench->add_option("--alpha", bench_alpha, "test level");
  bench->add_option("--smax", bench_smax, "sparsity cap");
  bench->add_option("--estimator", bench_estimator, "liml or tsls");
  bench->add_option("--df-convention", bench_df, "m_then_nm or nm_then_m");
  bench->add_option("--seed", bench_seed, "master seed");
  bench->add_option("--threads", bench_threads, "worker threads (0 = auto)");
  bench->add_flag("--full", bench_full,
                  "paper-scale run (2000 models) unless --models is given");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const spaceiv::Scm scm = spaceiv::scm_from_json(read_file(sim_model));
      const spaceiv::Dataset data = spaceiv::sample_dataset(scm, sim_n, sim_seed);
      if (sim_out.empty() || sim_out == "-") {
        spaceiv::write_dataset_csv(std::cout, data);
      } else {
        spaceiv::write_dataset_csv(sim_out, data);
      }
      return 0;
    }
    if (check->parsed()) return run_check(check_args);
    if (fit->parsed()) {
      const spaceiv::Dataset data = spaceiv::read_dataset_csv(fit_data);
      spaceiv::TestConfig cfg;
      cfg.alpha = fit_alpha;
      cfg.s_max = fit_smax;
      cfg.stage_estimator = spaceiv::stage_estimator_from_name(fit_estimator);
      cfg.df_convention = spaceiv::df_convention_from_name(fit_df);
      cfg.center_data = fit_center;
      cfg.test_empty_support = fit_test_empty;
      const spaceiv::FitResult result = spaceiv::space_iv(data, cfg);
      write_output(fit_out, spaceiv::fit_result_to_json(result, 2));
      return 0;
    }
    if (subset->parsed()) {
      const spaceiv::Dataset data = spaceiv::read_dataset_csv(subset_data);
      spaceiv::TestConfig cfg;
      cfg.alpha = subset_alpha;
      cfg.s_max = subset_smax;
      cfg.stage_estimator =
          spaceiv::stage_estimator_from_name(subset_estimator);
      cfg.df_convention = spaceiv::df_convention_from_name(subset_df);
      spaceiv::SubsetMode mode;
      if (subset_mode == "fixed") {
        mode = spaceiv::SubsetMode::FixedSize;
        spaceiv::require(subset_size >= 1, ErrorKind::InvalidArgument,
                         "fixed mode needs --size");
      } else if (subset_mode == "minimal") {
        mode = spaceiv::SubsetMode::Minimal;
      } else {
        spaceiv::fail(ErrorKind::InvalidArgument,
                      "mode must be fixed or minimal");
      }
      const std::vector<int> chosen =
          spaceiv::subset_intersection(data, cfg, mode, subset_size);
      nlohmann::json out;
      nlohmann::json set = nlohmann::json::array();
      for (int j : chosen) set.push_back(j + 1);
      out["subset"] = std::move(set);
      out["mode"] = subset_mode;
      write_output(subset_out, out.dump(2));
      return 0;
    }
    if (bench->parsed()) {
      spaceiv::BenchConfig cfg;
      if (!bench_config.empty()) {
        cfg = spaceiv::bench_config_from_json(read_file(bench_config));
      }
      if (bench_full && !bench_models) cfg.n_models = 2000;
      if (bench_models) cfg.n_models = *bench_models;
      if (!bench_sizes.empty()) cfg.sample_sizes = parse_sizes(bench_sizes);
      if (bench_alpha) cfg.alpha = *bench_alpha;
      if (bench_smax) cfg.s_max = *bench_smax;
      if (!bench_estimator.empty()) {
        cfg.stage_estimator =
            spaceiv::stage_estimator_from_name(bench_estimator);
      }
      if (!bench_df.empty()) {
        cfg.df_convention = spaceiv::df_convention_from_name(bench_df);
      }
      if (bench_seed) cfg.master_seed = *bench_seed;
      if (bench_threads) cfg.threads = *bench_threads;
      cfg.validate();

      std::filesystem::create_directories(bench_out_dir);
      const spaceiv::BenchResult result = spaceiv::run_benchmark(cfg);
      spaceiv::write_records_csv(bench_out_dir + "/records.csv", result.records);
      spaceiv::write_summary_csv(bench_out_dir + "/summary.csv", result.summary);
      spaceiv::write_figure_csvs(bench_out_dir, result);
      spaceiv::write_models_json(bench_out_dir + "/models.json", result);
      write_output(bench_out_dir + "/config.json",
                   spaceiv::bench_config_to_json(cfg, 2));
      const std::vector<int> counts = result.group_counts();
      std::cout << "models=" << cfg.n_models
                << " A1_and_A3=" << counts[0] << " A1_only=" << counts[1]
                << " none=" << counts[2] << "\n";
      return 0;
    }
  } catch (const Error& e) {
    nlohmann::json err;
    err["error"] = e.what();
    err["kind"] = spaceiv::error_kind_name(e.kind());
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    err["kind"] = "Internal";
    std::cerr << err.dump() << "\n";
    return 2;
  }
  return 0;
}
