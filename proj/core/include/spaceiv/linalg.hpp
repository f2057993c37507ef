#pragma once

#include <Eigen/Dense>
#include <vector>

namespace spaceiv::linalg {

// Relative singular-value threshold used for all numerical rank / image
// decisions unless a caller overrides it.
inline constexpr double kDefaultRankTol = 1e-8;

Eigen::MatrixXd columns(const Eigen::MatrixXd& m, const std::vector<int>& idx);

// Number of singular values above rel_tol * sigma_max.
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = kDefaultRankTol);

// Moore-Penrose pseudo-inverse with singular values below rel_tol * sigma_max
// treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m,
                               double rel_tol = kDefaultRankTol);

// Orthonormal basis of the column space (m x rank).
Eigen::MatrixXd image_basis(const Eigen::MatrixXd& m,
                            double rel_tol = kDefaultRankTol);

// Orthonormal basis of the null space (cols x (cols - rank)).
Eigen::MatrixXd null_basis(const Eigen::MatrixXd& m,
                           double rel_tol = kDefaultRankTol);

// sigma_min / sigma_max; 0 for an empty or zero matrix.
double reciprocal_condition(const Eigen::MatrixXd& m);

// Projector residual test: ||v - P_im(m) v|| <= rel_tol * ||v||.
bool in_image(const Eigen::MatrixXd& m, const Eigen::VectorXd& v,
              double rel_tol = kDefaultRankTol);

// Centered sample cross-covariance, 1/(n-1) normalization.
Eigen::MatrixXd sample_cross_covariance(const Eigen::MatrixXd& a,
                                        const Eigen::MatrixXd& b);
Eigen::VectorXd sample_cross_covariance(const Eigen::MatrixXd& a,
                                        const Eigen::VectorXd& b);

}  // namespace spaceiv::linalg
