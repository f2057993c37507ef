#include "spaceiv/identifiability.hpp"

#include <algorithm>

#include "spaceiv/errors.hpp"
#include "spaceiv/rng.hpp"
#include "spaceiv/subsets.hpp"

namespace spaceiv {

namespace {

constexpr std::uint64_t kA2SubsetBudget = 2'000'000;

bool images_equal(const Eigen::MatrixXd& c_s, const Eigen::MatrixXd& c_pa,
                  int rank_s, int rank_pa, double rank_tol) {
  if (rank_s != rank_pa) return false;
  Eigen::MatrixXd joint(c_s.rows(), c_s.cols() + c_pa.cols());
  joint << c_s, c_pa;
  return linalg::numerical_rank(joint, rank_tol) == rank_pa;
}

void check_pa(const std::vector<int>& pa, Eigen::Index d) {
  require(!pa.empty(), ErrorKind::InvalidArgument, "parent set must be nonempty");
  for (int j : pa) {
    require(j >= 0 && j < d, ErrorKind::InvalidArgument,
            "parent index out of range");
  }
}

}  // namespace

std::vector<bool> partial_identifiability(const Eigen::MatrixXd& c,
                                          double rank_tol) {
  const Eigen::Index d = c.cols();
  const Eigen::MatrixXd null_projector =
      Eigen::MatrixXd::Identity(d, d) - linalg::pseudo_inverse(c, rank_tol) * c;
  std::vector<bool> flags(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    flags[static_cast<std::size_t>(j)] =
        null_projector.row(j).cwiseAbs().maxCoeff() <= rank_tol;
  }
  return flags;
}

MaskedEstimate identified_coordinate_estimates(const Eigen::MatrixXd& cov_ix,
                                               const Eigen::VectorXd& cov_iy,
                                               double rank_tol) {
  require(cov_iy.size() == cov_ix.rows(), ErrorKind::DimensionMismatch,
          "cov_iy must match cov_ix rows");
  MaskedEstimate result;
  result.beta = linalg::pseudo_inverse(cov_ix, rank_tol) * cov_iy;
  result.identifiable = partial_identifiability(cov_ix, rank_tol);
  return result;
}

bool check_a1(const Eigen::MatrixXd& c, const std::vector<int>& pa,
              double rank_tol) {
  check_pa(pa, c.cols());
  return linalg::numerical_rank(linalg::columns(c, pa), rank_tol) ==
         static_cast<int>(pa.size());
}

SetCheckResult check_a2(const Eigen::MatrixXd& c, const std::vector<int>& pa,
                        const Eigen::VectorXd& beta_pa, int max_size,
                        double rank_tol, bool force) {
  check_pa(pa, c.cols());
  require(beta_pa.size() == static_cast<Eigen::Index>(pa.size()),
          ErrorKind::DimensionMismatch, "beta_pa must have length |PA|");
  const int d = static_cast<int>(c.cols());
  require(max_size >= 0 && max_size <= d, ErrorKind::InvalidArgument,
          "max_size must lie in [0, d]");
  if (!force) {
    std::uint64_t total = 0;
    for (int s = 0; s <= max_size; ++s) total += binomial(d, s);
    require(total <= kA2SubsetBudget, ErrorKind::SizeGuard,
            "A2 sweep exceeds the subset budget; pass force to override");
  }

  const Eigen::MatrixXd c_pa = linalg::columns(c, pa);
  const int rank_pa = linalg::numerical_rank(c_pa, rank_tol);
  const Eigen::VectorXd target = c_pa * beta_pa;

  SetCheckResult result;
  for (int s = 0; s <= max_size; ++s) {
    if (s == 0) {
      // The empty support can only match a vanishing target.
      if (rank_pa > 0 && target.norm() <= rank_tol) {
        result.holds = false;
        result.witness = std::vector<int>{};
        return result;
      }
      continue;
    }
    std::vector<int> subset = first_subset(s);
    do {
      const Eigen::MatrixXd c_s = linalg::columns(c, subset);
      const int rank_s = linalg::numerical_rank(c_s, rank_tol);
      if (rank_s > rank_pa) continue;
      if (images_equal(c_s, c_pa, rank_s, rank_pa, rank_tol)) continue;
      if (linalg::in_image(c_s, target, rank_tol)) {
        result.holds = false;
        result.witness = subset;
        return result;
      }
    } while (next_subset(subset, d));
  }
  return result;
}

SetCheckResult check_a3(const Eigen::MatrixXd& c, const std::vector<int>& pa,
                        double rank_tol) {
  check_pa(pa, c.cols());
  const int d = static_cast<int>(c.cols());
  const int k = static_cast<int>(pa.size());
  const Eigen::MatrixXd c_pa = linalg::columns(c, pa);
  const int rank_pa = linalg::numerical_rank(c_pa, rank_tol);

  SetCheckResult result;
  std::vector<int> subset = first_subset(k);
  do {
    if (subset == pa) continue;
    const Eigen::MatrixXd c_s = linalg::columns(c, subset);
    const int rank_s = linalg::numerical_rank(c_s, rank_tol);
    if (images_equal(c_s, c_pa, rank_s, rank_pa, rank_tol)) {
      result.holds = false;
      result.witness = subset;
      return result;
    }
  } while (next_subset(subset, d));
  return result;
}

IdentReport check_identifiability(const Scm& scm, int a2_max_size,
                                  double rank_tol, bool force) {
  const Eigen::MatrixXd c = scm.total_effects();
  IdentReport report;
  report.pa = scm.parent_set();
  require(!report.pa.empty(), ErrorKind::InvalidArgument,
          "model has an empty parent set");
  if (a2_max_size < 0) a2_max_size = static_cast<int>(report.pa.size());

  report.rank_c_pa =
      linalg::numerical_rank(linalg::columns(c, report.pa), rank_tol);
  report.a1 = report.rank_c_pa == static_cast<int>(report.pa.size());

  Eigen::VectorXd beta_pa(static_cast<Eigen::Index>(report.pa.size()));
  for (std::size_t i = 0; i < report.pa.size(); ++i) {
    beta_pa(static_cast<Eigen::Index>(i)) = scm.beta_star()(report.pa[i]);
  }
  const SetCheckResult a2 = check_a2(c, report.pa, beta_pa, a2_max_size,
                                     rank_tol, force);
  report.a2 = a2.holds;
  report.a2_witness = a2.witness;

  const SetCheckResult a3 = check_a3(c, report.pa, rank_tol);
  report.a3 = a3.holds;
  report.a3_witness = a3.witness;

  report.per_coordinate = partial_identifiability(c, rank_tol);
  report.solution_space_dim =
      scm.d() - linalg::numerical_rank(c, rank_tol);
  return report;
}

GenericityResult genericity_check(const CausalGraph& g, int draws,
                                  std::uint64_t seed, double rank_tol) {
  require(draws > 0, ErrorKind::InvalidArgument, "draws must be positive");
  const std::vector<int> pa = g.parents_of_response();
  require(!pa.empty(), ErrorKind::InvalidArgument,
          "graph has an empty parent set");
  GenericityResult result;
  result.draws = draws;
  for (int r = 0; r < draws; ++r) {
    const Scm scm = random_coefficient_scm(g, derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    const Eigen::MatrixXd c = scm.total_effects();
    const bool a1 = check_a1(c, pa, rank_tol);
    const bool a3 = check_a3(c, pa, rank_tol).holds;
    result.a1_count += a1 ? 1 : 0;
    result.a3_count += a3 ? 1 : 0;
    result.both_count += (a1 && a3) ? 1 : 0;
  }
  return result;
}

}  // namespace spaceiv
