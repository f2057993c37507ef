#include "spaceiv/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>

#include "spaceiv/errors.hpp"
#include "spaceiv/rng.hpp"
#include "spaceiv/subsets.hpp"

namespace spaceiv {

namespace {

constexpr std::uint64_t kB3SubsetBudget = 2'000'000;

// Unit-vertex-capacity flow network over the node-split graph.
// Node v becomes v_in = 2v, v_out = 2v+1 with a capacity-1 internal arc;
// original edges get effectively infinite capacity, so every minimum cut
// consists of internal arcs, i.e. of vertices.
class NodeSplitFlow {
 public:
  NodeSplitFlow(const CausalGraph& g, const std::vector<int>& sources,
                const std::vector<int>& targets)
      : node_count_(2 * g.node_count() + 2),
        source_(2 * g.node_count()),
        sink_(2 * g.node_count() + 1),
        adjacency_(static_cast<std::size_t>(node_count_)) {
    for (int v = 0; v < g.node_count(); ++v) {
      add_arc(in_node(v), out_node(v), 1);
      for (int w : g.successors(v)) add_arc(out_node(v), in_node(w), kInf);
    }
    for (int s : sources) add_arc(source_, in_node(s), kInf);
    for (int t : targets) add_arc(out_node(t), sink_, kInf);
  }

  int max_flow() {
    int total = 0;
    while (augment()) ++total;
    return total;
  }

  // Internal arcs saturated across the final residual source cut.
  std::vector<int> cut_vertices() {
    const std::vector<char> reachable = residual_reachable();
    std::vector<int> cut;
    for (int v = 0; v * 2 < node_count_ - 2; ++v) {
      if (reachable[static_cast<std::size_t>(in_node(v))] &&
          !reachable[static_cast<std::size_t>(out_node(v))]) {
        cut.push_back(v);
      }
    }
    return cut;
  }

 private:
  static constexpr int kInf = std::numeric_limits<int>::max() / 4;

  struct Arc {
    int to;
    int capacity;
    std::size_t reverse;
  };

  static int in_node(int v) { return 2 * v; }
  static int out_node(int v) { return 2 * v + 1; }

  void add_arc(int from, int to, int capacity) {
    auto& fwd = adjacency_[static_cast<std::size_t>(from)];
    auto& bwd = adjacency_[static_cast<std::size_t>(to)];
    fwd.push_back(Arc{to, capacity, bwd.size()});
    bwd.push_back(Arc{from, 0, fwd.size() - 1});
  }

  // One BFS augmenting path of unit flow (Edmonds-Karp).
  bool augment() {
    std::vector<std::pair<int, std::size_t>> parent(
        static_cast<std::size_t>(node_count_), {-1, 0});
    std::deque<int> queue{source_};
    parent[static_cast<std::size_t>(source_)] = {source_, 0};
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      if (v == sink_) break;
      const auto& arcs = adjacency_[static_cast<std::size_t>(v)];
      for (std::size_t i = 0; i < arcs.size(); ++i) {
        const Arc& arc = arcs[i];
        if (arc.capacity <= 0) continue;
        if (parent[static_cast<std::size_t>(arc.to)].first != -1) continue;
        parent[static_cast<std::size_t>(arc.to)] = {v, i};
        queue.push_back(arc.to);
      }
    }
    if (parent[static_cast<std::size_t>(sink_)].first == -1) return false;
    int v = sink_;
    while (v != source_) {
      auto [u, i] = parent[static_cast<std::size_t>(v)];
      Arc& arc = adjacency_[static_cast<std::size_t>(u)][i];
      arc.capacity -= 1;
      adjacency_[static_cast<std::size_t>(arc.to)][arc.reverse].capacity += 1;
      v = u;
    }
    return true;
  }

  std::vector<char> residual_reachable() const {
    std::vector<char> seen(static_cast<std::size_t>(node_count_), 0);
    std::deque<int> queue{source_};
    seen[static_cast<std::size_t>(source_)] = 1;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (const Arc& arc : adjacency_[static_cast<std::size_t>(v)]) {
        if (arc.capacity > 0 && !seen[static_cast<std::size_t>(arc.to)]) {
          seen[static_cast<std::size_t>(arc.to)] = 1;
          queue.push_back(arc.to);
        }
      }
    }
    return seen;
  }

  int node_count_;
  int source_;
  int sink_;
  std::vector<std::vector<Arc>> adjacency_;
};

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

CausalGraph::CausalGraph(int m, int d)
    : m_(m),
      d_(d),
      out_(static_cast<std::size_t>(m + d + 1)),
      in_(static_cast<std::size_t>(m + d + 1)) {
  require(m >= 0 && d >= 1, ErrorKind::InvalidArgument,
          "graph needs m >= 0 instruments and d >= 1 predictors");
}

CausalGraph::CausalGraph(
    int m, int d, const std::vector<std::pair<std::string, std::string>>& edges)
    : CausalGraph(m, d) {
  for (const auto& [from, to] : edges) {
    add_edge(node_from_label(from), node_from_label(to));
  }
  validate();
}

CausalGraph CausalGraph::from_scm(const Scm& scm, double zero_tol) {
  CausalGraph g(scm.m(), scm.d());
  for (int j = 0; j < scm.d(); ++j) {
    for (int i = 0; i < scm.d(); ++i) {
      if (std::abs(scm.b()(j, i)) > zero_tol) {
        g.add_edge(g.predictor_node(i), g.predictor_node(j));
      }
    }
    for (int k = 0; k < scm.m(); ++k) {
      if (std::abs(scm.a()(j, k)) > zero_tol) {
        g.add_edge(g.instrument_node(k), g.predictor_node(j));
      }
    }
    if (std::abs(scm.beta_star()(j)) > zero_tol) {
      g.add_edge(g.predictor_node(j), g.response_node());
    }
  }
  g.validate();
  return g;
}

std::string CausalGraph::node_label(int v) const {
  if (is_instrument(v)) return "I" + std::to_string(v + 1);
  if (is_predictor(v)) return "X" + std::to_string(predictor_index(v) + 1);
  return "Y";
}

int CausalGraph::node_from_label(const std::string& label) const {
  if (label == "Y") return response_node();
  require(label.size() >= 2 && (label[0] == 'I' || label[0] == 'X'),
          ErrorKind::ParseError, "node label must be Y, I<k> or X<j>");
  int index = 0;
  try {
    index = std::stoi(label.substr(1));
  } catch (const std::exception&) {
    fail(ErrorKind::ParseError, "bad node label: " + label);
  }
  if (label[0] == 'I') {
    require(index >= 1 && index <= m_, ErrorKind::ParseError,
            "instrument label out of range: " + label);
    return instrument_node(index - 1);
  }
  require(index >= 1 && index <= d_, ErrorKind::ParseError,
          "predictor label out of range: " + label);
  return predictor_node(index - 1);
}

void CausalGraph::add_edge(int from, int to) {
  require(from >= 0 && from < node_count() && to >= 0 && to < node_count(),
          ErrorKind::InvalidArgument, "edge endpoint out of range");
  require(!is_instrument(to), ErrorKind::InvalidArgument,
          "edges into instrument nodes are not allowed");
  require(!is_response(from), ErrorKind::InvalidArgument,
          "edges out of the response are not allowed");
  require(from != to, ErrorKind::CyclicGraph, "self-loops are not allowed");
  if (has_edge(from, to)) return;
  out_[static_cast<std::size_t>(from)].push_back(to);
  in_[static_cast<std::size_t>(to)].push_back(from);
}

bool CausalGraph::has_edge(int from, int to) const {
  const auto& succ = out_[static_cast<std::size_t>(from)];
  return std::find(succ.begin(), succ.end(), to) != succ.end();
}

std::vector<std::pair<int, int>> CausalGraph::edges() const {
  std::vector<std::pair<int, int>> result;
  for (int v = 0; v < node_count(); ++v) {
    for (int w : out_[static_cast<std::size_t>(v)]) result.emplace_back(v, w);
  }
  std::sort(result.begin(), result.end());
  return result;
}

std::vector<int> CausalGraph::parents_of_response() const {
  std::vector<int> pa;
  for (int v : in_[static_cast<std::size_t>(response_node())]) {
    pa.push_back(predictor_index(v));
  }
  std::sort(pa.begin(), pa.end());
  return pa;
}

void CausalGraph::validate() const {
  // Kahn topological sort over the predictor subgraph.
  std::vector<int> indegree(static_cast<std::size_t>(d_), 0);
  for (int j = 0; j < d_; ++j) {
    for (int w : out_[static_cast<std::size_t>(predictor_node(j))]) {
      if (is_predictor(w)) ++indegree[static_cast<std::size_t>(predictor_index(w))];
    }
  }
  std::deque<int> ready;
  for (int j = 0; j < d_; ++j) {
    if (indegree[static_cast<std::size_t>(j)] == 0) ready.push_back(j);
  }
  int visited = 0;
  while (!ready.empty()) {
    const int j = ready.front();
    ready.pop_front();
    ++visited;
    for (int w : out_[static_cast<std::size_t>(predictor_node(j))]) {
      if (!is_predictor(w)) continue;
      const int k = predictor_index(w);
      if (--indegree[static_cast<std::size_t>(k)] == 0) ready.push_back(k);
    }
  }
  require(visited == d_, ErrorKind::CyclicGraph,
          "predictor subgraph contains a cycle");
}

bool CausalGraph::operator==(const CausalGraph& other) const {
  return m_ == other.m_ && d_ == other.d_ && edges() == other.edges();
}

std::vector<int> instrument_ancestors(const CausalGraph& g,
                                      const std::vector<int>& predictors) {
  require(!predictors.empty(), ErrorKind::InvalidArgument,
          "instrument_ancestors needs a nonempty predictor set");
  std::vector<char> seen(static_cast<std::size_t>(g.node_count()), 0);
  std::deque<int> queue;
  for (int j : predictors) {
    require(j >= 0 && j < g.d(), ErrorKind::InvalidArgument,
            "predictor index out of range");
    const int v = g.predictor_node(j);
    if (!seen[static_cast<std::size_t>(v)]) {
      seen[static_cast<std::size_t>(v)] = 1;
      queue.push_back(v);
    }
  }
  std::vector<int> instruments;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int u : g.predecessors(v)) {
      if (seen[static_cast<std::size_t>(u)]) continue;
      seen[static_cast<std::size_t>(u)] = 1;
      if (g.is_instrument(u)) {
        instruments.push_back(u);
      } else {
        queue.push_back(u);
      }
    }
  }
  std::sort(instruments.begin(), instruments.end());
  return instruments;
}

CausalGraph marginalize(const CausalGraph& g, const std::vector<int>& keep) {
  std::vector<char> kept_predictor(static_cast<std::size_t>(g.d()), 0);
  for (int j : keep) {
    require(j >= 0 && j < g.d(), ErrorKind::InvalidArgument,
            "marginalization index out of range");
    kept_predictor[static_cast<std::size_t>(j)] = 1;
  }
  auto node_kept = [&](int v) {
    if (g.is_predictor(v)) {
      return kept_predictor[static_cast<std::size_t>(g.predictor_index(v))] != 0;
    }
    return true;  // instruments and Y always stay
  };

  CausalGraph result(g.m(), g.d());
  // From each kept source, walk through dropped predictors only; every kept
  // node reached this way gets a direct edge.
  for (int u = 0; u < g.node_count(); ++u) {
    if (g.is_response(u) || !node_kept(u)) continue;
    std::vector<char> seen(static_cast<std::size_t>(g.node_count()), 0);
    std::deque<int> queue{u};
    seen[static_cast<std::size_t>(u)] = 1;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int w : g.successors(v)) {
        if (seen[static_cast<std::size_t>(w)]) continue;
        seen[static_cast<std::size_t>(w)] = 1;
        if (node_kept(w)) {
          result.add_edge(u, w);
        } else {
          queue.push_back(w);  // dropped predictor: keep walking
        }
      }
    }
  }
  return result;
}

DisjointPathsResult max_node_disjoint_paths(
    const CausalGraph& g, const std::vector<int>& source_instruments,
    const std::vector<int>& target_predictors) {
  require(!source_instruments.empty() && !target_predictors.empty(),
          ErrorKind::InvalidArgument,
          "disjoint-path query needs nonempty sources and targets");
  std::vector<int> sources;
  sources.reserve(source_instruments.size());
  for (int k : source_instruments) {
    require(k >= 0 && k < g.m(), ErrorKind::InvalidArgument,
            "instrument index out of range");
    sources.push_back(g.instrument_node(k));
  }
  std::vector<int> targets;
  targets.reserve(target_predictors.size());
  for (int j : target_predictors) {
    require(j >= 0 && j < g.d(), ErrorKind::InvalidArgument,
            "predictor index out of range");
    targets.push_back(g.predictor_node(j));
  }
  NodeSplitFlow flow(g, sources, targets);
  DisjointPathsResult result;
  result.count = flow.max_flow();
  for (int v : flow.cut_vertices()) result.min_cut.push_back(g.node_label(v));
  return result;
}

GraphReport check_b_conditions(const CausalGraph& g,
                               const BCheckOptions& opts) {
  GraphReport report;
  report.pa_y = g.parents_of_response();
  require(!report.pa_y.empty(), ErrorKind::InvalidArgument,
          "check_b_conditions needs a nonempty parent set");
  const int pa_size = static_cast<int>(report.pa_y.size());

  std::vector<int> all_instruments(static_cast<std::size_t>(g.m()));
  for (int k = 0; k < g.m(); ++k) all_instruments[static_cast<std::size_t>(k)] = k;
  require(!all_instruments.empty(), ErrorKind::InvalidArgument,
          "check_b_conditions needs at least one instrument");

  const DisjointPathsResult b1 =
      max_node_disjoint_paths(g, all_instruments, report.pa_y);
  report.b1_path_count = b1.count;
  report.b1_min_cut = b1.min_cut;
  report.b1 = b1.count >= pa_size;

  if (!opts.force) {
    require(!(g.d() > 30 && pa_size > 4), ErrorKind::SizeGuard,
            "B3 sweep over C(d,|PA|) sets is too large; pass force to override");
    require(binomial(g.d(), pa_size) <= kB3SubsetBudget, ErrorKind::SizeGuard,
            "B3 sweep exceeds the subset budget; pass force to override");
  }

  const std::vector<int> pa_ancestry = instrument_ancestors(g, report.pa_y);
  report.b3 = true;
  std::vector<int> subset = first_subset(pa_size);
  do {
    if (subset == report.pa_y) continue;
    const bool i_holds = instrument_ancestors(g, subset) != pa_ancestry;
    if (i_holds) continue;
    std::vector<int> joint = subset;
    joint.insert(joint.end(), report.pa_y.begin(), report.pa_y.end());
    joint = sorted_unique(std::move(joint));
    const DisjointPathsResult cut =
        max_node_disjoint_paths(g, all_instruments, joint);
    B3SetRecord record;
    record.set = subset;
    record.i_holds = false;
    record.cut_size = cut.count;
    record.ii_holds = cut.count >= pa_size + 1;
    report.b3_i_violations.push_back(record);
    if (!record.ii_holds) {
      report.b3 = false;
      if (!report.b3_witness) report.b3_witness = subset;
      if (!opts.exhaustive) break;
    }
  } while (next_subset(subset, g.d()));
  return report;
}

Scm random_coefficient_scm(const CausalGraph& g, std::uint64_t seed,
                           double low, double high) {
  require(low > 0.0 && high > low, ErrorKind::InvalidArgument,
          "coefficient band requires 0 < low < high");
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> magnitude(low, high);
  std::uniform_int_distribution<int> sign(0, 1);
  auto draw = [&] {
    const double v = magnitude(rng);
    return sign(rng) == 0 ? v : -v;
  };

  const int d = g.d();
  const int m = g.m();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, m);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  // Deterministic draw order: the sorted edge list.
  for (const auto& [from, to] : g.edges()) {
    if (g.is_response(to)) {
      beta(g.predictor_index(from)) = draw();
    } else if (g.is_instrument(from)) {
      a(g.predictor_index(to), from) = draw();
    } else {
      b(g.predictor_index(to), g.predictor_index(from)) = draw();
    }
  }
  return Scm(std::move(b), std::move(a), std::move(beta),
             NoiseSpec::standard(d));
}

}  // namespace spaceiv
