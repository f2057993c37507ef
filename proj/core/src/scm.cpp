#include "spaceiv/scm.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "spaceiv/errors.hpp"
#include "spaceiv/linalg.hpp"
#include "spaceiv/rng.hpp"

namespace spaceiv {

namespace {

// Solves (Id - B)^T Z = A column-wise and returns Z^T = A^T (Id - B)^-T.
Eigen::MatrixXd effects_from_structure(const Eigen::MatrixXd& a,
                                       const Eigen::MatrixXd& b,
                                       double rcond_threshold) {
  const Eigen::Index d = b.rows();
  require(b.cols() == d, ErrorKind::DimensionMismatch, "B must be square");
  require(a.rows() == d, ErrorKind::DimensionMismatch,
          "A must have one row per predictor");
  const Eigen::MatrixXd id_minus_b =
      Eigen::MatrixXd::Identity(d, d) - b;
  const double rcond = linalg::reciprocal_condition(id_minus_b);
  require(rcond > rcond_threshold, ErrorKind::SingularStructure,
          "Id - B is numerically singular (rcond " + std::to_string(rcond) +
              ")");
  // A^T (Id-B)^-T = ((Id-B)^-1 A)^T
  return id_minus_b.partialPivLu().solve(a).transpose();
}

}  // namespace

NoiseSpec NoiseSpec::standard(int d) {
  NoiseSpec spec;
  spec.confounder_dim = 1;
  spec.confounder_loading_x = Eigen::VectorXd::Ones(d);
  spec.confounder_loading_y = 1.0;
  spec.eps_x_scale = Eigen::VectorXd::Ones(d);
  spec.eps_y_scale = 1.0;
  spec.instrument_law = InstrumentLaw::StandardNormal;
  return spec;
}

void NoiseSpec::validate(int d) const {
  require(confounder_dim >= 0, ErrorKind::InvalidArgument,
          "confounder_dim must be non-negative");
  require(confounder_loading_x.size() == d, ErrorKind::DimensionMismatch,
          "confounder_loading_x must have length d");
  require(eps_x_scale.size() == d, ErrorKind::DimensionMismatch,
          "eps_x_scale must have length d");
  require((eps_x_scale.array() > 0.0).all(), ErrorKind::InvalidArgument,
          "eps_x_scale entries must be strictly positive");
  require(eps_y_scale > 0.0, ErrorKind::InvalidArgument,
          "eps_y_scale must be strictly positive");
}

Scm::Scm(Eigen::MatrixXd b, Eigen::MatrixXd a, Eigen::VectorXd beta_star,
         NoiseSpec noise)
    : b_(std::move(b)),
      a_(std::move(a)),
      beta_star_(std::move(beta_star)),
      noise_(std::move(noise)) {
  require(b_.rows() == b_.cols(), ErrorKind::DimensionMismatch,
          "B must be square");
  require(a_.rows() == b_.rows(), ErrorKind::DimensionMismatch,
          "A must be d x m");
  require(beta_star_.size() == b_.rows(), ErrorKind::DimensionMismatch,
          "beta_star must have length d");
  noise_.validate(d());
  // Construction-time invertibility check; throws SingularStructure.
  (void)effects_from_structure(a_, b_, kRcondThreshold);
}

std::vector<int> Scm::parent_set(double zero_tol) const {
  std::vector<int> pa;
  for (int j = 0; j < d(); ++j) {
    if (std::abs(beta_star_(j)) > zero_tol) pa.push_back(j);
  }
  return pa;
}

Eigen::MatrixXd Scm::total_effects() const {
  return total_effect_matrix(a_, b_);
}

void Dataset::validate() const {
  require(inst.rows() == x.rows() && y.size() == x.rows(),
          ErrorKind::DimensionMismatch, "dataset row counts disagree");
  require(n() > m(), ErrorKind::InvalidSampleSize,
          "dataset needs n > m observations");
}

Eigen::MatrixXd total_effect_matrix(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& b,
                                    double rcond_threshold) {
  return effects_from_structure(a, b, rcond_threshold);
}

Eigen::MatrixXd extended_effect_matrix(const Eigen::MatrixXd& a,
                                       const Eigen::MatrixXd& b,
                                       const Eigen::VectorXd& gamma,
                                       const Eigen::VectorXd& beta_star,
                                       double rcond_threshold) {
  const Eigen::Index d = b.rows();
  require(gamma.size() == d && beta_star.size() == d,
          ErrorKind::DimensionMismatch,
          "gamma and beta_star must have length d");
  Eigen::MatrixXd b_ext(d + 1, d + 1);
  b_ext.topLeftCorner(d, d) = b;
  b_ext.topRightCorner(d, 1) = gamma;
  b_ext.bottomLeftCorner(1, d) = beta_star.transpose();
  b_ext(d, d) = 0.0;
  Eigen::MatrixXd a_ext(d + 1, a.cols());
  a_ext.topRows(d) = a;
  a_ext.bottomRows(1).setZero();
  return effects_from_structure(a_ext, b_ext, rcond_threshold).leftCols(d);
}

Dataset sample_dataset(const Scm& scm, int n, std::uint64_t seed) {
  const int d = scm.d();
  const int m = scm.m();
  require(n > m, ErrorKind::InvalidSampleSize,
          "sample size must exceed the instrument count");

  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> unit_index(0, m - 1);
  const NoiseSpec& noise = scm.noise();

  Eigen::MatrixXd inst = Eigen::MatrixXd::Zero(n, m);
  Eigen::VectorXd confounder = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd eps_x(n, d);
  Eigen::VectorXd eps_y(n);

  // Fixed per-row draw order: instruments, confounder, eps_x, eps_y.
  for (int i = 0; i < n; ++i) {
    switch (noise.instrument_law) {
      case InstrumentLaw::StandardNormal:
        for (int k = 0; k < m; ++k) inst(i, k) = gauss(rng);
        break;
      case InstrumentLaw::DiscreteUniformUnitVectors:
        inst(i, unit_index(rng)) = 1.0;
        break;
    }
    double h = 0.0;
    for (int q = 0; q < noise.confounder_dim; ++q) h += gauss(rng);
    confounder(i) = h;
    for (int j = 0; j < d; ++j) eps_x(i, j) = noise.eps_x_scale(j) * gauss(rng);
    eps_y(i) = noise.eps_y_scale * gauss(rng);
  }

  const Eigen::MatrixXd rhs = inst * scm.a().transpose() +
                              confounder * noise.confounder_loading_x.transpose() +
                              eps_x;
  const Eigen::MatrixXd id_minus_b =
      Eigen::MatrixXd::Identity(d, d) - scm.b();
  require(linalg::reciprocal_condition(id_minus_b) > kRcondThreshold,
          ErrorKind::SingularStructure, "Id - B is numerically singular");
  // Row-wise x_i = (Id-B)^-1 rhs_i, i.e. X^T = (Id-B)^-1 RHS^T.
  Dataset data;
  data.x = id_minus_b.partialPivLu().solve(rhs.transpose()).transpose();
  data.inst = std::move(inst);
  data.y = data.x * scm.beta_star() + confounder * noise.confounder_loading_y +
           eps_y;
  data.validate();
  return data;
}

Eigen::VectorXd moment_residual(const Dataset& data,
                                const Eigen::VectorXd& beta) {
  require(beta.size() == data.d(), ErrorKind::DimensionMismatch,
          "beta must have length d");
  const Eigen::VectorXd residual = data.y - data.x * beta;
  return linalg::sample_cross_covariance(data.inst, residual);
}

Eigen::VectorXd moment_residual(const Scm& scm, const Eigen::VectorXd& beta) {
  require(beta.size() == scm.d(), ErrorKind::DimensionMismatch,
          "beta must have length d");
  const Eigen::MatrixXd cov_inst =
      population_instrument_covariance(scm.noise().instrument_law, scm.m());
  return cov_inst * scm.total_effects() * (scm.beta_star() - beta);
}

Eigen::MatrixXd population_instrument_covariance(InstrumentLaw law, int m) {
  require(m > 0, ErrorKind::InvalidArgument, "instrument count must be positive");
  switch (law) {
    case InstrumentLaw::StandardNormal:
      return Eigen::MatrixXd::Identity(m, m);
    case InstrumentLaw::DiscreteUniformUnitVectors: {
      const double dm = static_cast<double>(m);
      return Eigen::MatrixXd::Identity(m, m) / dm -
             Eigen::MatrixXd::Ones(m, m) / (dm * dm);
    }
  }
  fail(ErrorKind::InvalidArgument, "unknown instrument law");
}

}  // namespace spaceiv
