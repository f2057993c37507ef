#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "spaceiv/scm.hpp"

namespace spaceiv {

enum class StageEstimator { Liml, Tsls };

// Degrees-of-freedom ordering for the acceptance threshold. MThenNm
// (F^{-1}(1-alpha; m, n-m)) matches the statistic's construction and
// calibrates to level alpha; NmThenM is kept selectable.
enum class DfConvention { MThenNm, NmThenM };

struct TestConfig {
  double alpha = 0.05;
  int s_max = 3;
  StageEstimator stage_estimator = StageEstimator::Liml;
  DfConvention df_convention = DfConvention::MThenNm;
  bool test_empty_support = false;  // also test beta = 0 before s = 1
  bool center_data = false;         // subtract column means (real-data use)

  void validate(int d) const;
};

struct SparsityStep {
  int s = 0;
  std::vector<int> support;
  double statistic = std::numeric_limits<double>::quiet_NaN();
  double threshold = std::numeric_limits<double>::quiet_NaN();
  bool accepted = false;
  int skipped_subsets = 0;
};

struct FitResult {
  Eigen::VectorXd beta;      // length d, zeros off the selected support
  std::vector<int> support;  // exactly the nonzero coordinates of beta
  double statistic = std::numeric_limits<double>::quiet_NaN();
  double threshold = std::numeric_limits<double>::quiet_NaN();
  bool accepted = false;
  // Set when the search exhausted s_max without an accepted test; the model
  // assumptions may be violated.
  bool assumption_warning = false;
  std::vector<SparsityStep> path;
};

// Anderson-Rubin statistic
//   T(beta) = (r' P_Z r) / (r' (Id - P_Z) r) * (n - m) / m,  r = Y - X beta.
double ar_statistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::MatrixXd& inst, const Eigen::VectorXd& beta);

// Acceptance threshold at level alpha under the given df convention.
double ar_threshold(int n, int m, double alpha,
                    DfConvention convention = DfConvention::MThenNm);

// LIML coefficients on the given regressors: the support-restricted minimizer
// of the AR statistic, via the smallest generalized eigenvalue of
// (W' P_Z W, W' (Id-P_Z) W) with W = [Y | X_S].
Eigen::VectorXd liml(const Eigen::MatrixXd& x_s, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& inst);

// Two-stage least squares on the given regressors.
Eigen::VectorXd tsls(const Eigen::MatrixXd& x_s, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& inst);

// Sparse causal effect search: per sparsity level fit the stage estimator on
// every support, keep the AR-minimal one, stop at the first accepted level.
FitResult space_iv(const Dataset& data, const TestConfig& cfg);

enum class SubsetMode { FixedSize, Minimal };

// Intersection of all accepted supports: of size k (FixedSize) or of the
// smallest size with any acceptance (Minimal). Empty result when nothing is
// accepted.
std::vector<int> subset_intersection(const Dataset& data, const TestConfig& cfg,
                                     SubsetMode mode, int k = -1);

// Best-subset OLS baseline selected by AIC = n ln(RSS/n) + 2(s+1).
FitResult ols_sparse(const Dataset& data, int s_max);

enum class OracleMode { KnownSet, KnownSize };

// Benchmark-only moment-equation fits with ground-truth knowledge: the true
// parent set (KnownSet) or only its size (KnownSize, best squared moment
// loss over all sets of that size).
FitResult oracle_fit(const Dataset& data, const std::vector<int>& pa,
                     OracleMode mode);
FitResult oracle_fit(const Scm& scm, const std::vector<int>& pa,
                     OracleMode mode);  // population covariances

}  // namespace spaceiv
