#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace spaceiv {

// (Id - B) must have a reciprocal condition number above this to count as
// invertible.
inline constexpr double kRcondThreshold = 1e-10;

// Coefficients with magnitude at or below this do not produce graph edges.
inline constexpr double kZeroTol = 1e-9;

enum class InstrumentLaw {
  StandardNormal,
  // Shift-experiment regime: each instrument row is a unit vector e_k with
  // k drawn uniformly from {1,...,m}.
  DiscreteUniformUnitVectors,
};

// Additive noise family: the hidden confounder enters X and Y linearly
// through fixed loadings, and the idiosyncratic terms are scaled Gaussians.
// With confounder_dim q > 1 the loadings multiply the sum of the q
// independent standard-normal components.
struct NoiseSpec {
  int confounder_dim = 1;
  Eigen::VectorXd confounder_loading_x;  // length d
  double confounder_loading_y = 1.0;
  Eigen::VectorXd eps_x_scale;  // length d, strictly positive
  double eps_y_scale = 1.0;
  InstrumentLaw instrument_law = InstrumentLaw::StandardNormal;

  // Unit loadings and unit scales with q = 1.
  static NoiseSpec standard(int d);

  void validate(int d) const;
};

// Linear instrumental-variable structural model
//   X := B X + A I + h,   Y := X' beta_star + g
// with h, g drawn per NoiseSpec. Immutable after construction.
class Scm {
 public:
  Scm(Eigen::MatrixXd b, Eigen::MatrixXd a, Eigen::VectorXd beta_star,
      NoiseSpec noise);

  int d() const { return static_cast<int>(b_.rows()); }
  int m() const { return static_cast<int>(a_.cols()); }
  const Eigen::MatrixXd& b() const { return b_; }
  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::VectorXd& beta_star() const { return beta_star_; }
  const NoiseSpec& noise() const { return noise_; }

  // Indices (0-based) of the nonzero coordinates of beta_star.
  std::vector<int> parent_set(double zero_tol = kZeroTol) const;

  // Total-effect matrix C of this model.
  Eigen::MatrixXd total_effects() const;

 private:
  Eigen::MatrixXd b_;
  Eigen::MatrixXd a_;
  Eigen::VectorXd beta_star_;
  NoiseSpec noise_;
};

struct Dataset {
  Eigen::MatrixXd x;     // n x d
  Eigen::MatrixXd inst;  // n x m
  Eigen::VectorXd y;     // n

  int n() const { return static_cast<int>(x.rows()); }
  int d() const { return static_cast<int>(x.cols()); }
  int m() const { return static_cast<int>(inst.cols()); }

  void validate() const;  // consistent shapes, n > m
};

// C = A' (Id - B)^-T. Entry (i, j) is the total causal effect of instrument
// i on predictor j (sum over directed paths of edge-coefficient products).
Eigen::MatrixXd total_effect_matrix(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& b,
                                    double rcond_threshold = kRcondThreshold);

// Total-effect matrix when Y has children: gamma holds the Y -> X^j edge
// coefficients. Returns the first d columns of (A', 0) (Id - B_ext)^-T for
// the (d+1)-dimensional system over (X, Y).
Eigen::MatrixXd extended_effect_matrix(const Eigen::MatrixXd& a,
                                       const Eigen::MatrixXd& b,
                                       const Eigen::VectorXd& gamma,
                                       const Eigen::VectorXd& beta_star,
                                       double rcond_threshold = kRcondThreshold);

// Draw n i.i.d. observations. Pure function of (scm, n, seed).
Dataset sample_dataset(const Scm& scm, int n, std::uint64_t seed);

// Empirical moment residual Cov^(I, Y - X' beta).
Eigen::VectorXd moment_residual(const Dataset& data,
                                const Eigen::VectorXd& beta);

// Population moment residual Cov(I) C (beta_star - beta), exact algebra.
Eigen::VectorXd moment_residual(const Scm& scm, const Eigen::VectorXd& beta);

// Closed-form Cov(I) for the given law.
Eigen::MatrixXd population_instrument_covariance(InstrumentLaw law, int m);

}  // namespace spaceiv
