#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "spaceiv/graph.hpp"
#include "spaceiv/linalg.hpp"
#include "spaceiv/scm.hpp"

namespace spaceiv {

struct IdentReport {
  bool a1 = false;
  int rank_c_pa = 0;
  bool a2 = false;
  std::optional<std::vector<int>> a2_witness;
  bool a3 = false;
  std::optional<std::vector<int>> a3_witness;
  std::vector<bool> per_coordinate;  // per-coordinate identifiability, length d
  int solution_space_dim = 0;        // d - rank(C)
  std::vector<int> pa;
};

// Coordinate j is identifiable from the moment condition iff the j-th
// coordinate of Null(C) is {0}; tested as row j of (Id - C^+ C) vanishing
// within rank_tol.
std::vector<bool> partial_identifiability(
    const Eigen::MatrixXd& c, double rank_tol = linalg::kDefaultRankTol);

struct MaskedEstimate {
  Eigen::VectorXd beta;            // Moore-Penrose solution, full length d
  std::vector<bool> identifiable;  // entries are meaningful only where true
};

// beta = Cov(I,X)^+ Cov(I,Y); the mask comes from partial_identifiability of
// cov_ix (same null space as C).
MaskedEstimate identified_coordinate_estimates(
    const Eigen::MatrixXd& cov_ix, const Eigen::VectorXd& cov_iy,
    double rank_tol = linalg::kDefaultRankTol);

// (A1): rank(C_PA) = |PA|.
bool check_a1(const Eigen::MatrixXd& c, const std::vector<int>& pa,
              double rank_tol = linalg::kDefaultRankTol);

struct SetCheckResult {
  bool holds = true;
  std::optional<std::vector<int>> witness;
};

// (A2) restricted to supports of size at most max_size: whenever
// rank(C_S) <= rank(C_PA) and im(C_S) != im(C_PA), the vector C_PA beta_PA
// must not lie in im(C_S). The sweep covers C(d,0..max_size) subsets; a
// budget guard refuses oversized sweeps unless force is set.
SetCheckResult check_a2(const Eigen::MatrixXd& c, const std::vector<int>& pa,
                        const Eigen::VectorXd& beta_pa, int max_size,
                        double rank_tol = linalg::kDefaultRankTol,
                        bool force = false);

// (A3): every S with |S| = |PA|, S != PA spans a different column space.
SetCheckResult check_a3(const Eigen::MatrixXd& c, const std::vector<int>& pa,
                        double rank_tol = linalg::kDefaultRankTol);

// Full algebraic report for a model. a2_max_size < 0 defaults to |PA|, the
// supports the sparse-recovery argument actually needs.
IdentReport check_identifiability(const Scm& scm, int a2_max_size = -1,
                                  double rank_tol = linalg::kDefaultRankTol,
                                  bool force = false);

struct GenericityResult {
  int draws = 0;
  int a1_count = 0;
  int a3_count = 0;
  int both_count = 0;
};

// Draws random coefficients on the graph structure and counts how often
// (A1) and (A3) hold; the graphical conditions promise both almost surely.
GenericityResult genericity_check(const CausalGraph& g, int draws,
                                  std::uint64_t seed,
                                  double rank_tol = linalg::kDefaultRankTol);

}  // namespace spaceiv
