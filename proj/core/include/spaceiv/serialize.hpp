#pragma once

#include <iosfwd>
#include <string>

#include "spaceiv/bench.hpp"
#include "spaceiv/estimators.hpp"
#include "spaceiv/graph.hpp"
#include "spaceiv/identifiability.hpp"
#include "spaceiv/scm.hpp"

namespace spaceiv {

// All index sets in the interchange formats are 1-based ("X3" means the
// third predictor); the C++ API is 0-based throughout.

std::string scm_to_json(const Scm& scm, int indent = 2);
Scm scm_from_json(const std::string& text);

// CSV with header I1..Im,X1..Xd,Y; doubles printed with %.17g so a rewrite
// of the same dataset is byte-identical.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

std::string graph_to_json(const CausalGraph& g, int indent = 2);
CausalGraph graph_from_json(const std::string& text);
std::string graph_to_dot(const CausalGraph& g);

std::string ident_report_to_json(const IdentReport& report, int indent = 2);
std::string graph_report_to_json(const GraphReport& report, int indent = 2);
std::string fit_result_to_json(const FitResult& fit, int indent = 2);

std::string bench_config_to_json(const BenchConfig& cfg, int indent = 2);
BenchConfig bench_config_from_json(const std::string& text);

void write_records_csv(const std::string& path,
                       const std::vector<BenchRecord>& records);
void write_summary_csv(const std::string& path,
                       const std::vector<BenchSummaryRow>& summary);
// fig_rmse_vs_n.csv, fig_sparsity_vs_n.csv, fig_rmse_by_group.csv
void write_figure_csvs(const std::string& directory, const BenchResult& result);
void write_models_json(const std::string& path, const BenchResult& result);

std::string stage_estimator_name(StageEstimator estimator);
StageEstimator stage_estimator_from_name(const std::string& name);
std::string df_convention_name(DfConvention convention);
DfConvention df_convention_from_name(const std::string& name);

}  // namespace spaceiv
