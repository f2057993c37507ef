#include "spaceiv/serialize.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spaceiv/errors.hpp"
#include "spaceiv/stats.hpp"

namespace spaceiv {

namespace {

using nlohmann::json;

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  require(!j.is_discarded(), ErrorKind::ParseError, "malformed JSON input");
  return j;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows,
                                 Eigen::Index cols, const std::string& name) {
  require(j.is_array() && static_cast<Eigen::Index>(j.size()) == rows,
          ErrorKind::ParseError, name + " must be a " + std::to_string(rows) +
                                     "-row matrix");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols,
            ErrorKind::ParseError, name + " row has wrong length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index size,
                                 const std::string& name) {
  require(j.is_array() && static_cast<Eigen::Index>(j.size()) == size,
          ErrorKind::ParseError,
          name + " must have length " + std::to_string(size));
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json index_set_to_json(const std::vector<int>& set) {
  json out = json::array();
  for (int j : set) out.push_back(j + 1);  // 1-based externally
  return out;
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string dump(const json& j, int indent) {
  return indent < 0 ? j.dump() : j.dump(indent);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  return fields;
}

std::string instrument_law_name(InstrumentLaw law) {
  return law == InstrumentLaw::StandardNormal ? "standard-normal"
                                              : "discrete-uniform-unit-vectors";
}

InstrumentLaw instrument_law_from_name(const std::string& name) {
  if (name == "standard-normal") return InstrumentLaw::StandardNormal;
  if (name == "discrete-uniform-unit-vectors") {
    return InstrumentLaw::DiscreteUniformUnitVectors;
  }
  fail(ErrorKind::ParseError, "unknown instrument law: " + name);
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::IoError, "cannot open for writing: " + path);
  return out;
}

}  // namespace

std::string scm_to_json(const Scm& scm, int indent) {
  json j;
  j["d"] = scm.d();
  j["m"] = scm.m();
  j["B"] = matrix_to_json(scm.b());
  j["A"] = matrix_to_json(scm.a());
  j["beta"] = vector_to_json(scm.beta_star());
  const NoiseSpec& noise = scm.noise();
  j["noise"] = {
      {"q", noise.confounder_dim},
      {"confounder_loading_x", vector_to_json(noise.confounder_loading_x)},
      {"confounder_loading_y", noise.confounder_loading_y},
      {"eps_x_scale", vector_to_json(noise.eps_x_scale)},
      {"eps_y_scale", noise.eps_y_scale},
      {"instrument_law", instrument_law_name(noise.instrument_law)},
  };
  return dump(j, indent);
}

Scm scm_from_json(const std::string& text) {
  const json j = parse(text);
  require(j.contains("d") && j.contains("m"), ErrorKind::ParseError,
          "model JSON needs d and m");
  const auto d = j.at("d").get<Eigen::Index>();
  const auto m = j.at("m").get<Eigen::Index>();
  require(d >= 1 && m >= 1, ErrorKind::ParseError, "d and m must be positive");
  Eigen::MatrixXd b = matrix_from_json(j.at("B"), d, d, "B");
  Eigen::MatrixXd a = matrix_from_json(j.at("A"), d, m, "A");
  Eigen::VectorXd beta = vector_from_json(j.at("beta"), d, "beta");

  NoiseSpec noise = NoiseSpec::standard(static_cast<int>(d));
  if (j.contains("noise")) {
    const json& nj = j.at("noise");
    if (nj.contains("q")) noise.confounder_dim = nj.at("q").get<int>();
    if (nj.contains("confounder_loading_x")) {
      noise.confounder_loading_x =
          vector_from_json(nj.at("confounder_loading_x"), d,
                           "confounder_loading_x");
    }
    if (nj.contains("confounder_loading_y")) {
      noise.confounder_loading_y = nj.at("confounder_loading_y").get<double>();
    }
    if (nj.contains("eps_x_scale")) {
      noise.eps_x_scale = vector_from_json(nj.at("eps_x_scale"), d,
                                           "eps_x_scale");
    }
    if (nj.contains("eps_y_scale")) {
      noise.eps_y_scale = nj.at("eps_y_scale").get<double>();
    }
    if (nj.contains("instrument_law")) {
      noise.instrument_law =
          instrument_law_from_name(nj.at("instrument_law").get<std::string>());
    }
  }
  return Scm(std::move(b), std::move(a), std::move(beta), std::move(noise));
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (int k = 0; k < data.m(); ++k) out << "I" << (k + 1) << ",";
  for (int j = 0; j < data.d(); ++j) out << "X" << (j + 1) << ",";
  out << "Y\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int k = 0; k < data.m(); ++k) {
      out << format_double(data.inst(i, k)) << ",";
    }
    for (int j = 0; j < data.d(); ++j) {
      out << format_double(data.x(i, j)) << ",";
    }
    out << format_double(data.y(i)) << "\n";
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  auto out = open_for_write(path);
  write_dataset_csv(out, data);
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::ParseError,
          "dataset CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);
  int m = 0;
  int d = 0;
  std::size_t pos = 0;
  while (pos < header.size() && header[pos] == "I" + std::to_string(m + 1)) {
    ++m;
    ++pos;
  }
  while (pos < header.size() && header[pos] == "X" + std::to_string(d + 1)) {
    ++d;
    ++pos;
  }
  require(m >= 1 && d >= 1 && pos + 1 == header.size() && header[pos] == "Y",
          ErrorKind::ParseError, "dataset CSV header must be I1..Im,X1..Xd,Y");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    require(fields.size() == static_cast<std::size_t>(m + d + 1),
            ErrorKind::ParseError, "dataset CSV row has wrong field count");
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      try {
        row[i] = std::stod(fields[i]);
      } catch (const std::exception&) {
        fail(ErrorKind::ParseError, "non-numeric dataset entry: " + fields[i]);
      }
    }
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Dataset data;
  data.inst.resize(n, m);
  data.x.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (int k = 0; k < m; ++k) data.inst(i, k) = row[static_cast<std::size_t>(k)];
    for (int j = 0; j < d; ++j) {
      data.x(i, j) = row[static_cast<std::size_t>(m + j)];
    }
    data.y(i) = row.back();
  }
  data.validate();
  return data;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::IoError, "cannot open for reading: " + path);
  return read_dataset_csv(in);
}

std::string graph_to_json(const CausalGraph& g, int indent) {
  json j;
  j["m"] = g.m();
  j["d"] = g.d();
  json edges = json::array();
  for (const auto& [from, to] : g.edges()) {
    edges.push_back({g.node_label(from), g.node_label(to)});
  }
  j["edges"] = std::move(edges);
  j["pa_y"] = index_set_to_json(g.parents_of_response());
  return dump(j, indent);
}

CausalGraph graph_from_json(const std::string& text) {
  const json j = parse(text);
  require(j.contains("m") && j.contains("d"), ErrorKind::ParseError,
          "graph JSON needs m and d");
  CausalGraph g(j.at("m").get<int>(), j.at("d").get<int>());
  if (j.contains("edges")) {
    for (const json& edge : j.at("edges")) {
      require(edge.is_array() && edge.size() == 2, ErrorKind::ParseError,
              "graph edge must be a [from, to] pair");
      g.add_edge(g.node_from_label(edge[0].get<std::string>()),
                 g.node_from_label(edge[1].get<std::string>()));
    }
  }
  if (j.contains("pa_y")) {
    for (const json& entry : j.at("pa_y")) {
      const int index = entry.get<int>();
      require(index >= 1 && index <= g.d(), ErrorKind::ParseError,
              "pa_y index out of range");
      g.add_edge(g.predictor_node(index - 1), g.response_node());
    }
  }
  g.validate();
  return g;
}

std::string graph_to_dot(const CausalGraph& g) {
  std::ostringstream out;
  out << "digraph causal {\n  rankdir=LR;\n";
  std::vector<char> isolated(static_cast<std::size_t>(g.node_count()), 1);
  for (const auto& [from, to] : g.edges()) {
    isolated[static_cast<std::size_t>(from)] = 0;
    isolated[static_cast<std::size_t>(to)] = 0;
  }
  for (int v = 0; v < g.node_count(); ++v) {
    if (isolated[static_cast<std::size_t>(v)] && !g.is_response(v)) continue;
    out << "  \"" << g.node_label(v) << "\" [shape="
        << (g.is_instrument(v) ? "box" : "ellipse") << "];\n";
  }
  for (const auto& [from, to] : g.edges()) {
    out << "  \"" << g.node_label(from) << "\" -> \"" << g.node_label(to)
        << "\";\n";
  }
  out << "}\n";
  return out.str();
}

std::string ident_report_to_json(const IdentReport& report, int indent) {
  json j;
  j["A1"] = report.a1;
  j["A2"] = report.a2;
  j["A3"] = report.a3;
  j["rank_c_pa"] = report.rank_c_pa;
  j["a2_witness"] = report.a2_witness ? index_set_to_json(*report.a2_witness)
                                      : json(nullptr);
  j["a3_witness"] = report.a3_witness ? index_set_to_json(*report.a3_witness)
                                      : json(nullptr);
  j["per_coordinate"] = report.per_coordinate;
  j["solution_space_dim"] = report.solution_space_dim;
  j["pa"] = index_set_to_json(report.pa);
  return dump(j, indent);
}

std::string graph_report_to_json(const GraphReport& report, int indent) {
  json j;
  j["B1"] = report.b1;
  j["B3"] = report.b3;
  j["b1_path_count"] = report.b1_path_count;
  j["b1_min_cut"] = report.b1_min_cut;
  j["b3_witness"] = report.b3_witness ? index_set_to_json(*report.b3_witness)
                                      : json(nullptr);
  json violations = json::array();
  for (const B3SetRecord& record : report.b3_i_violations) {
    violations.push_back({{"set", index_set_to_json(record.set)},
                          {"ii_holds", record.ii_holds},
                          {"cut_size", record.cut_size}});
  }
  j["b3_i_violations"] = std::move(violations);
  j["pa_y"] = index_set_to_json(report.pa_y);
  return dump(j, indent);
}

std::string fit_result_to_json(const FitResult& fit, int indent) {
  json j;
  j["beta"] = vector_to_json(fit.beta);
  j["support"] = index_set_to_json(fit.support);
  j["statistic"] = fit.statistic;
  j["threshold"] = std::isfinite(fit.threshold) ? json(fit.threshold)
                                                : json(nullptr);
  j["accepted"] = fit.accepted;
  j["assumption_warning"] = fit.assumption_warning;
  json path = json::array();
  for (const SparsityStep& step : fit.path) {
    path.push_back({{"s", step.s},
                    {"support", index_set_to_json(step.support)},
                    {"statistic", step.statistic},
                    {"threshold", step.threshold},
                    {"accepted", step.accepted},
                    {"skipped_subsets", step.skipped_subsets}});
  }
  j["path"] = std::move(path);
  return dump(j, indent);
}

std::string bench_config_to_json(const BenchConfig& cfg, int indent) {
  json j;
  j["d"] = cfg.d;
  j["m"] = cfg.m;
  j["q"] = cfg.q;
  j["n_models"] = cfg.n_models;
  j["sample_sizes"] = cfg.sample_sizes;
  j["s_max"] = cfg.s_max;
  j["alpha"] = cfg.alpha;
  j["methods"] = cfg.methods;
  j["stage_estimator"] = stage_estimator_name(cfg.stage_estimator);
  j["df_convention"] = df_convention_name(cfg.df_convention);
  j["master_seed"] = cfg.master_seed;
  j["threads"] = cfg.threads;
  return dump(j, indent);
}

BenchConfig bench_config_from_json(const std::string& text) {
  const json j = parse(text);
  BenchConfig cfg;
  if (j.contains("d")) cfg.d = j.at("d").get<int>();
  if (j.contains("m")) cfg.m = j.at("m").get<int>();
  if (j.contains("q")) cfg.q = j.at("q").get<int>();
  if (j.contains("n_models")) cfg.n_models = j.at("n_models").get<int>();
  if (j.contains("sample_sizes")) {
    cfg.sample_sizes = j.at("sample_sizes").get<std::vector<int>>();
  }
  if (j.contains("s_max")) cfg.s_max = j.at("s_max").get<int>();
  if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
  if (j.contains("methods")) {
    cfg.methods = j.at("methods").get<std::vector<std::string>>();
  }
  if (j.contains("stage_estimator")) {
    cfg.stage_estimator =
        stage_estimator_from_name(j.at("stage_estimator").get<std::string>());
  }
  if (j.contains("df_convention")) {
    cfg.df_convention =
        df_convention_from_name(j.at("df_convention").get<std::string>());
  }
  if (j.contains("master_seed")) {
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  }
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  cfg.validate();
  return cfg;
}

void write_records_csv(const std::string& path,
                       const std::vector<BenchRecord>& records) {
  auto out = open_for_write(path);
  out << "model_id,group,n,method,rmse,correct_sparsity,correct_support\n";
  for (const BenchRecord& record : records) {
    out << record.model_id << "," << assumption_group_name(record.group) << ","
        << record.n << "," << record.method << ","
        << format_double(record.rmse) << ","
        << (record.correct_sparsity ? 1 : 0) << ","
        << (record.correct_support ? 1 : 0) << "\n";
  }
}

void write_summary_csv(const std::string& path,
                       const std::vector<BenchSummaryRow>& summary) {
  auto out = open_for_write(path);
  out << "method,n,group,count,rmse_q25,rmse_median,rmse_q75,"
         "frac_correct_sparsity,frac_correct_support\n";
  for (const BenchSummaryRow& row : summary) {
    out << row.method << "," << row.n << "," << assumption_group_name(row.group)
        << "," << row.count << "," << format_double(row.rmse_q25) << ","
        << format_double(row.rmse_median) << "," << format_double(row.rmse_q75)
        << "," << format_double(row.frac_correct_sparsity) << ","
        << format_double(row.frac_correct_support) << "\n";
  }
}

void write_figure_csvs(const std::string& directory,
                       const BenchResult& result) {
  const int n_max = result.config.sample_sizes.back();
  {
    // RMSE quartiles per method and sample size on the fully identified group.
    auto out = open_for_write(directory + "/fig_rmse_vs_n.csv");
    out << "method,n,rmse_q25,rmse_median,rmse_q75\n";
    for (const BenchSummaryRow& row : result.summary) {
      if (row.group != AssumptionGroup::A1AndA3) continue;
      out << row.method << "," << row.n << "," << format_double(row.rmse_q25)
          << "," << format_double(row.rmse_median) << ","
          << format_double(row.rmse_q75) << "\n";
    }
  }
  {
    // Fraction of correct sparsity per sample size for the subset search.
    auto out = open_for_write(directory + "/fig_sparsity_vs_n.csv");
    out << "n,frac_correct_sparsity\n";
    for (const BenchSummaryRow& row : result.summary) {
      if (row.group != AssumptionGroup::A1AndA3) continue;
      if (row.method != kMethodSpaceIv) continue;
      out << row.n << "," << format_double(row.frac_correct_sparsity) << "\n";
    }
  }
  {
    // RMSE quartiles per method and assumption group at the largest n.
    auto out = open_for_write(directory + "/fig_rmse_by_group.csv");
    out << "group,method,rmse_q25,rmse_median,rmse_q75\n";
    for (const BenchSummaryRow& row : result.summary) {
      if (row.n != n_max) continue;
      out << assumption_group_name(row.group) << "," << row.method << ","
          << format_double(row.rmse_q25) << "," << format_double(row.rmse_median)
          << "," << format_double(row.rmse_q75) << "\n";
    }
  }
}

void write_models_json(const std::string& path, const BenchResult& result) {
  json models = json::array();
  for (std::size_t i = 0; i < result.models.size(); ++i) {
    json entry;
    entry["model_id"] = static_cast<int>(i);
    entry["group"] = assumption_group_name(result.model_groups[i]);
    entry["scm"] = json::parse(scm_to_json(result.models[i], -1));
    models.push_back(std::move(entry));
  }
  auto out = open_for_write(path);
  out << models.dump(2) << "\n";
}

std::string stage_estimator_name(StageEstimator estimator) {
  return estimator == StageEstimator::Liml ? "liml" : "tsls";
}

StageEstimator stage_estimator_from_name(const std::string& name) {
  if (name == "liml" || name == "LIML") return StageEstimator::Liml;
  if (name == "tsls" || name == "TSLS") return StageEstimator::Tsls;
  fail(ErrorKind::ParseError, "unknown stage estimator: " + name);
}

std::string df_convention_name(DfConvention convention) {
  return convention == DfConvention::MThenNm ? "m_then_nm" : "nm_then_m";
}

DfConvention df_convention_from_name(const std::string& name) {
  if (name == "m_then_nm") return DfConvention::MThenNm;
  if (name == "nm_then_m") return DfConvention::NmThenM;
  fail(ErrorKind::ParseError, "unknown df convention: " + name);
}

}  // namespace spaceiv
