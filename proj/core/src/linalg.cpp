#include "spaceiv/linalg.hpp"

#include "spaceiv/errors.hpp"

namespace spaceiv::linalg {

namespace {

Eigen::JacobiSVD<Eigen::MatrixXd> thin_svd(const Eigen::MatrixXd& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

int rank_from_singular_values(const Eigen::VectorXd& sv, double rel_tol) {
  if (sv.size() == 0) return 0;
  const double cutoff = rel_tol * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  }
  return rank;
}

}  // namespace

Eigen::MatrixXd columns(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    require(idx[k] >= 0 && idx[k] < m.cols(), ErrorKind::DimensionMismatch,
            "column index out of range");
    out.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
  }
  return out;
}

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return rank_from_singular_values(svd.singularValues(), rel_tol);
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return Eigen::MatrixXd(m.cols(), m.rows());
  auto svd = thin_svd(m);
  const Eigen::VectorXd& sv = svd.singularValues();
  const int rank = rank_from_singular_values(sv, rel_tol);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (int i = 0; i < rank; ++i) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::MatrixXd image_basis(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return Eigen::MatrixXd(m.rows(), 0);
  auto svd = thin_svd(m);
  const int rank = rank_from_singular_values(svd.singularValues(), rel_tol);
  return svd.matrixU().leftCols(rank);
}

Eigen::MatrixXd null_basis(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return Eigen::MatrixXd::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const int rank = rank_from_singular_values(svd.singularValues(), rel_tol);
  return svd.matrixV().rightCols(m.cols() - rank);
}

double reciprocal_condition(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv(0) <= 0.0) return 0.0;
  return sv(sv.size() - 1) / sv(0);
}

bool in_image(const Eigen::MatrixXd& m, const Eigen::VectorXd& v,
              double rel_tol) {
  const double norm = v.norm();
  if (norm == 0.0) return true;
  const Eigen::MatrixXd basis = image_basis(m, rel_tol);
  const Eigen::VectorXd residual = v - basis * (basis.transpose() * v);
  return residual.norm() <= rel_tol * norm;
}

Eigen::MatrixXd sample_cross_covariance(const Eigen::MatrixXd& a,
                                        const Eigen::MatrixXd& b) {
  require(a.rows() == b.rows(), ErrorKind::DimensionMismatch,
          "covariance inputs need equal sample counts");
  require(a.rows() > 1, ErrorKind::InvalidArgument,
          "covariance needs at least two samples");
  const Eigen::MatrixXd ac = a.rowwise() - a.colwise().mean();
  const Eigen::MatrixXd bc = b.rowwise() - b.colwise().mean();
  return (ac.transpose() * bc) / static_cast<double>(a.rows() - 1);
}

Eigen::VectorXd sample_cross_covariance(const Eigen::MatrixXd& a,
                                        const Eigen::VectorXd& b) {
  return sample_cross_covariance(a, Eigen::MatrixXd(b)).col(0);
}

}  // namespace spaceiv::linalg
