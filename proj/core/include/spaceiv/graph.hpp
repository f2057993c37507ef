#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spaceiv/scm.hpp"

namespace spaceiv {

// Directed graph over m instrument nodes, d predictor nodes and the response.
// Structural rules enforced on every edge: nothing points into an instrument,
// nothing leaves the response, instruments are never adjacent to each other.
// The predictor subgraph must be acyclic (checked by validate()).
//
// Node labels follow the interchange format: "I1".."Im", "X1".."Xd", "Y".
class CausalGraph {
 public:
  CausalGraph(int m, int d);
  CausalGraph(int m, int d,
              const std::vector<std::pair<std::string, std::string>>& edges);

  // Edge for every coefficient with magnitude above zero_tol.
  static CausalGraph from_scm(const Scm& scm, double zero_tol = kZeroTol);

  int m() const { return m_; }
  int d() const { return d_; }
  int node_count() const { return m_ + d_ + 1; }

  int instrument_node(int k) const { return k; }
  int predictor_node(int j) const { return m_ + j; }
  int response_node() const { return m_ + d_; }
  bool is_instrument(int v) const { return v < m_; }
  bool is_predictor(int v) const { return v >= m_ && v < m_ + d_; }
  bool is_response(int v) const { return v == m_ + d_; }
  int predictor_index(int v) const { return v - m_; }

  std::string node_label(int v) const;
  int node_from_label(const std::string& label) const;

  void add_edge(int from, int to);
  bool has_edge(int from, int to) const;
  const std::vector<int>& successors(int v) const { return out_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& predecessors(int v) const { return in_[static_cast<std::size_t>(v)]; }
  std::vector<std::pair<int, int>> edges() const;

  // 0-based predictor indices with an edge into Y.
  std::vector<int> parents_of_response() const;

  // Throws CyclicGraph if the predictor subgraph contains a cycle.
  void validate() const;

  bool operator==(const CausalGraph& other) const;

 private:
  int m_;
  int d_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

// Instruments with a directed path to some node of `predictors` (0-based).
std::vector<int> instrument_ancestors(const CausalGraph& g,
                                      const std::vector<int>& predictors);

// Latent-projection marginalization onto the predictors in `keep`: same node
// index space; kept nodes u, w are joined iff g has a directed path from u to
// w whose intermediate nodes all lie outside `keep`. Dropped predictors end
// up isolated.
CausalGraph marginalize(const CausalGraph& g, const std::vector<int>& keep);

struct DisjointPathsResult {
  int count = 0;
  // A minimum vertex cut (node labels); by Menger its size equals count.
  // Endpoints may appear in the cut.
  std::vector<std::string> min_cut;
};

// Maximum number of pairwise node-disjoint directed paths from the given
// instruments to the given predictors, via unit-vertex-capacity max flow on
// the node-split graph.
DisjointPathsResult max_node_disjoint_paths(
    const CausalGraph& g, const std::vector<int>& source_instruments,
    const std::vector<int>& target_predictors);

struct B3SetRecord {
  std::vector<int> set;  // 0-based predictor indices
  bool i_holds = false;
  bool ii_holds = false;
  int cut_size = 0;
};

struct GraphReport {
  bool b1 = false;
  int b1_path_count = 0;
  std::vector<std::string> b1_min_cut;
  bool b3 = false;
  std::optional<std::vector<int>> b3_witness;  // first set violating (i) and (ii)
  std::vector<B3SetRecord> b3_i_violations;    // sets failing (i), with (ii) outcome
  std::vector<int> pa_y;
};

struct BCheckOptions {
  bool force = false;       // override the combinatorial size guard
  bool exhaustive = false;  // keep enumerating after the first violation
};

// B1: at least |PA(Y)| node-disjoint paths from the instruments to PA(Y).
// B3: every S with |S| = |PA(Y)|, S != PA(Y) has distinct instrument
// ancestry (i) or a minimum vertex cut between the instruments and S u PA(Y)
// of size at least |PA(Y)|+1 (ii).
GraphReport check_b_conditions(const CausalGraph& g,
                               const BCheckOptions& opts = {});

// SCM on the graph's structure with all edge coefficients drawn uniformly
// from (-high,-low) u (low,high) and standard noise. Parents of Y keep their
// drawn coefficients as beta_star entries.
Scm random_coefficient_scm(const CausalGraph& g, std::uint64_t seed,
                           double low = 0.5, double high = 1.5);

}  // namespace spaceiv
