#include "spaceiv/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "spaceiv/errors.hpp"
#include "spaceiv/linalg.hpp"
#include "spaceiv/stats.hpp"
#include "spaceiv/subsets.hpp"

namespace spaceiv {

namespace {

constexpr double kResidualTol = 1e-12;
constexpr double kNormalizationTol = 1e-12;
constexpr double kPencilTol = 1e-12;

// Cross products shared by every subset fit on one dataset. Column layout is
// [X^1 .. X^d, Y]; proj holds W' P_Z W, resid holds W' (Id - P_Z) W.
struct SubsetContext {
  Eigen::MatrixXd proj;
  Eigen::MatrixXd resid;
  Eigen::MatrixXd gram;
  int n = 0;
  int m = 0;
  int d = 0;

  double df_factor() const {
    return static_cast<double>(n - m) / static_cast<double>(m);
  }
};

void center_columns(Eigen::MatrixXd& m) {
  m.rowwise() -= m.colwise().mean().eval();
}

SubsetContext build_context(Eigen::MatrixXd x, Eigen::VectorXd y,
                            Eigen::MatrixXd inst, bool center) {
  require(x.rows() == y.size() && inst.rows() == x.rows(),
          ErrorKind::DimensionMismatch, "sample counts disagree");
  require(x.rows() > inst.cols(), ErrorKind::InvalidSampleSize,
          "need n > m observations");
  if (center) {
    center_columns(x);
    center_columns(inst);
    y.array() -= y.mean();
  }
  SubsetContext ctx;
  ctx.n = static_cast<int>(x.rows());
  ctx.m = static_cast<int>(inst.cols());
  ctx.d = static_cast<int>(x.cols());

  Eigen::MatrixXd w(x.rows(), x.cols() + 1);
  w << x, y;
  const Eigen::MatrixXd ztz = inst.transpose() * inst;
  require(linalg::reciprocal_condition(ztz) > 1e-12,
          ErrorKind::RankDeficientInstruments,
          "instrument Gram matrix is numerically singular");
  const Eigen::MatrixXd ztw = inst.transpose() * w;
  ctx.gram = w.transpose() * w;
  ctx.proj = ztw.transpose() * ztz.ldlt().solve(ztw);
  ctx.resid = ctx.gram - ctx.proj;
  return ctx;
}

// Indices of [X_S, Y] inside the context's column layout; Y comes last.
std::vector<int> with_response(const std::vector<int>& support, int d) {
  std::vector<int> idx = support;
  idx.push_back(d);
  return idx;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()),
                      static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    for (std::size_t c = 0; c < idx.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          m(idx[r], idx[c]);
    }
  }
  return out;
}

struct LimlSolution {
  Eigen::VectorXd beta;  // coefficients for the X-part
  double lambda = 0.0;   // min generalized eigenvalue = AR ratio at beta
};

// Smallest generalized eigenpair of (proj, resid) restricted to [X_S, Y],
// normalized so the Y coefficient is one. resid is the right-hand matrix;
// when it is singular the only admissible outcome is an exact-fit direction
// shared by both forms.
LimlSolution liml_from_grams(const Eigen::MatrixXd& proj_s,
                             const Eigen::MatrixXd& resid_s) {
  const Eigen::Index k = proj_s.rows();
  const double scale = proj_s.trace() + resid_s.trace();
  Eigen::VectorXd direction;
  double lambda = 0.0;

  Eigen::LLT<Eigen::MatrixXd> llt(resid_s);
  if (llt.info() == Eigen::Success) {
    // Whiten: resid = L L', solve the symmetric problem L^-1 proj L^-T.
    Eigen::MatrixXd half = llt.matrixL().solve(proj_s);
    Eigen::MatrixXd reduced = llt.matrixL().solve(half.transpose());
    reduced = 0.5 * (reduced + reduced.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced);
    require(eig.info() == Eigen::Success, ErrorKind::EigenFailure,
            "eigen decomposition failed");
    lambda = std::max(eig.eigenvalues()(0), 0.0);
    direction = llt.matrixU().solve(eig.eigenvectors().col(0));
  } else {
    // Singular right-hand form: look for a common null direction, which is
    // an exact fit (zero residual in- and outside the instrument space).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(resid_s);
    require(eig.info() == Eigen::Success, ErrorKind::EigenFailure,
            "eigen decomposition failed");
    const double cutoff =
        kPencilTol * std::max(eig.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
    Eigen::Index null_dim = 0;
    while (null_dim < k && eig.eigenvalues()(null_dim) <= cutoff) ++null_dim;
    require(null_dim > 0, ErrorKind::EigenFailure,
            "degenerate pencil without a null direction");
    const Eigen::MatrixXd null_space = eig.eigenvectors().leftCols(null_dim);
    Eigen::MatrixXd reduced =
        null_space.transpose() * proj_s * null_space;
    reduced = 0.5 * (reduced + reduced.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> inner(reduced);
    direction = null_space * inner.eigenvectors().col(0);
    require(direction.dot(proj_s * direction) <=
                kPencilTol * std::max(scale, 1.0),
            ErrorKind::EigenFailure,
            "degenerate pencil without an exact-fit direction");
    lambda = 0.0;
  }

  const double y_coef = direction(k - 1);
  require(std::abs(y_coef) > kNormalizationTol * direction.norm(),
          ErrorKind::NormalizationFailure,
          "minimizing direction has a vanishing response coefficient");
  LimlSolution solution;
  solution.beta = -direction.head(k - 1) / y_coef;
  solution.lambda = lambda;
  return solution;
}

LimlSolution liml_on(const SubsetContext& ctx, const std::vector<int>& support) {
  const std::vector<int> idx = with_response(support, ctx.d);
  return liml_from_grams(submatrix(ctx.proj, idx), submatrix(ctx.resid, idx));
}

Eigen::VectorXd tsls_on(const SubsetContext& ctx,
                        const std::vector<int>& support) {
  const auto size = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd first_stage(size, size);
  Eigen::VectorXd target(size);
  for (Eigen::Index r = 0; r < size; ++r) {
    for (Eigen::Index c = 0; c < size; ++c) {
      first_stage(r, c) =
          ctx.proj(support[static_cast<std::size_t>(r)],
                   support[static_cast<std::size_t>(c)]);
    }
    target(r) = ctx.proj(support[static_cast<std::size_t>(r)], ctx.d);
  }
  require(linalg::reciprocal_condition(first_stage) > 1e-12,
          ErrorKind::RankDeficientFirstStage,
          "projected design is numerically singular");
  return first_stage.ldlt().solve(target);
}

// AR statistic of a support-restricted coefficient via the cross products.
double statistic_on(const SubsetContext& ctx, const std::vector<int>& support,
                    const Eigen::VectorXd& beta_s) {
  const std::vector<int> idx = with_response(support, ctx.d);
  Eigen::VectorXd v(static_cast<Eigen::Index>(idx.size()));
  v.head(v.size() - 1) = -beta_s;
  v(v.size() - 1) = 1.0;
  const Eigen::MatrixXd proj_s = submatrix(ctx.proj, idx);
  const Eigen::MatrixXd resid_s = submatrix(ctx.resid, idx);
  const Eigen::MatrixXd gram_s = submatrix(ctx.gram, idx);
  const double numerator = v.dot(proj_s * v);
  const double denominator = v.dot(resid_s * v);
  const double total = v.dot(gram_s * v);
  require(denominator > kResidualTol * total, ErrorKind::DegenerateResidual,
          "residual lies in the instrument column space");
  return std::max(numerator, 0.0) / denominator * ctx.df_factor();
}

struct LevelFit {
  bool found = false;
  double statistic = std::numeric_limits<double>::infinity();
  std::vector<int> support;
  Eigen::VectorXd beta_s;
  int skipped = 0;
};

// Best support of size s under the stage estimator; lexicographically first
// support wins exact ties because enumeration is lexicographic and the
// comparison strict.
LevelFit best_support_of_size(const SubsetContext& ctx, int s,
                              StageEstimator estimator) {
  LevelFit best;
  std::vector<int> subset = first_subset(s);
  do {
    try {
      Eigen::VectorXd beta_s;
      double statistic = 0.0;
      if (estimator == StageEstimator::Liml) {
        const LimlSolution sol = liml_on(ctx, subset);
        beta_s = sol.beta;
        statistic = sol.lambda * ctx.df_factor();
      } else {
        beta_s = tsls_on(ctx, subset);
        statistic = statistic_on(ctx, subset, beta_s);
      }
      if (statistic < best.statistic) {
        best.found = true;
        best.statistic = statistic;
        best.support = subset;
        best.beta_s = beta_s;
      }
    } catch (const Error&) {
      ++best.skipped;
    }
  } while (next_subset(subset, ctx.d));
  return best;
}

Eigen::VectorXd expand(const std::vector<int>& support,
                       const Eigen::VectorXd& beta_s, int d) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < support.size(); ++i) {
    beta(support[i]) = beta_s(static_cast<Eigen::Index>(i));
  }
  return beta;
}

std::vector<int> nonzero_support(const Eigen::VectorXd& beta) {
  std::vector<int> support;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) support.push_back(static_cast<int>(j));
  }
  return support;
}

FitResult finish_fit(const Eigen::VectorXd& beta, double statistic,
                     double threshold, bool accepted,
                     std::vector<SparsityStep> path) {
  FitResult result;
  result.beta = beta;
  result.support = nonzero_support(beta);
  result.statistic = statistic;
  result.threshold = threshold;
  result.accepted = accepted;
  result.assumption_warning = !accepted;
  result.path = std::move(path);
  return result;
}

// Moment-equation least squares: solve M_S beta_S ~= v, loss in the moment
// metric. Shared by the two oracle modes and both data regimes.
FitResult oracle_from_moments(const Eigen::MatrixXd& moments,
                              const Eigen::VectorXd& target,
                              const std::vector<int>& pa, OracleMode mode) {
  require(!pa.empty(), ErrorKind::InvalidArgument,
          "oracle requires a nonempty parent set");
  const int d = static_cast<int>(moments.cols());
  for (int j : pa) {
    require(j >= 0 && j < d, ErrorKind::InvalidArgument,
            "parent index out of range");
  }

  auto solve_set = [&](const std::vector<int>& set) {
    const Eigen::MatrixXd m_s = linalg::columns(moments, set);
    const Eigen::VectorXd beta_s = m_s.colPivHouseholderQr().solve(target);
    const double loss = (m_s * beta_s - target).squaredNorm();
    return std::make_pair(beta_s, loss);
  };

  std::vector<int> chosen = pa;
  Eigen::VectorXd beta_s;
  double loss = 0.0;
  if (mode == OracleMode::KnownSet) {
    std::tie(beta_s, loss) = solve_set(pa);
  } else {
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<int> subset = first_subset(static_cast<int>(pa.size()));
    do {
      auto [candidate, candidate_loss] = solve_set(subset);
      if (candidate_loss < best_loss) {
        best_loss = candidate_loss;
        chosen = subset;
        beta_s = candidate;
      }
    } while (next_subset(subset, d));
    loss = best_loss;
  }
  return finish_fit(expand(chosen, beta_s, d), loss,
                    std::numeric_limits<double>::infinity(), true, {});
}

}  // namespace

void TestConfig::validate(int d) const {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidArgument,
          "alpha must lie in (0,1)");
  require(s_max >= 1 && s_max <= d, ErrorKind::InvalidArgument,
          "s_max must lie in [1, d]");
}

double ar_statistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::MatrixXd& inst, const Eigen::VectorXd& beta) {
  require(beta.size() == x.cols(), ErrorKind::DimensionMismatch,
          "beta must have length d");
  require(x.rows() == y.size() && inst.rows() == x.rows(),
          ErrorKind::DimensionMismatch, "sample counts disagree");
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(inst.cols());
  require(n > m, ErrorKind::InvalidSampleSize, "need n > m observations");

  const Eigen::MatrixXd ztz = inst.transpose() * inst;
  require(linalg::reciprocal_condition(ztz) > 1e-12,
          ErrorKind::RankDeficientInstruments,
          "instrument Gram matrix is numerically singular");
  const Eigen::VectorXd r = y - x * beta;
  const Eigen::VectorXd ztr = inst.transpose() * r;
  const double numerator = ztr.dot(ztz.ldlt().solve(ztr));
  const double total = r.squaredNorm();
  const double denominator = total - numerator;
  require(denominator > kResidualTol * total, ErrorKind::DegenerateResidual,
          "residual lies in the instrument column space");
  return std::max(numerator, 0.0) / denominator *
         (static_cast<double>(n - m) / static_cast<double>(m));
}

double ar_threshold(int n, int m, double alpha, DfConvention convention) {
  require(n > m && m >= 1, ErrorKind::InvalidSampleSize,
          "threshold needs n > m >= 1");
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidArgument,
          "alpha must lie in (0,1)");
  const double df1 = convention == DfConvention::MThenNm ? m : n - m;
  const double df2 = convention == DfConvention::MThenNm ? n - m : m;
  return stats::f_quantile(1.0 - alpha, df1, df2);
}

Eigen::VectorXd liml(const Eigen::MatrixXd& x_s, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& inst) {
  require(x_s.cols() >= 1, ErrorKind::InvalidArgument,
          "liml needs at least one regressor");
  const SubsetContext ctx = build_context(x_s, y, inst, /*center=*/false);
  std::vector<int> all = first_subset(static_cast<int>(x_s.cols()));
  return liml_on(ctx, all).beta;
}

Eigen::VectorXd tsls(const Eigen::MatrixXd& x_s, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& inst) {
  require(x_s.cols() >= 1, ErrorKind::InvalidArgument,
          "tsls needs at least one regressor");
  const SubsetContext ctx = build_context(x_s, y, inst, /*center=*/false);
  std::vector<int> all = first_subset(static_cast<int>(x_s.cols()));
  return tsls_on(ctx, all);
}

FitResult space_iv(const Dataset& data, const TestConfig& cfg) {
  data.validate();
  cfg.validate(data.d());
  const SubsetContext ctx =
      build_context(data.x, data.y, data.inst, cfg.center_data);
  const double threshold =
      ar_threshold(ctx.n, ctx.m, cfg.alpha, cfg.df_convention);

  std::vector<SparsityStep> path;
  if (cfg.test_empty_support) {
    const double statistic = statistic_on(ctx, {}, Eigen::VectorXd(0));
    SparsityStep step;
    step.s = 0;
    step.statistic = statistic;
    step.threshold = threshold;
    step.accepted = statistic <= threshold;
    path.push_back(step);
    if (step.accepted) {
      return finish_fit(Eigen::VectorXd::Zero(ctx.d), statistic, threshold,
                        true, std::move(path));
    }
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(ctx.d);
  double statistic = std::numeric_limits<double>::quiet_NaN();
  bool accepted = false;
  for (int s = 1; s <= cfg.s_max; ++s) {
    const LevelFit best = best_support_of_size(ctx, s, cfg.stage_estimator);
    require(best.found, ErrorKind::AllSubsetsFailed,
            "every support of size " + std::to_string(s) + " failed to fit");
    SparsityStep step;
    step.s = s;
    step.support = best.support;
    step.statistic = best.statistic;
    step.threshold = threshold;
    step.accepted = best.statistic <= threshold;
    step.skipped_subsets = best.skipped;
    path.push_back(step);

    beta = expand(best.support, best.beta_s, ctx.d);
    statistic = best.statistic;
    accepted = step.accepted;
    if (accepted) break;
  }
  return finish_fit(beta, statistic, threshold, accepted, std::move(path));
}

std::vector<int> subset_intersection(const Dataset& data, const TestConfig& cfg,
                                     SubsetMode mode, int k) {
  data.validate();
  cfg.validate(data.d());
  const SubsetContext ctx =
      build_context(data.x, data.y, data.inst, cfg.center_data);
  const double threshold =
      ar_threshold(ctx.n, ctx.m, cfg.alpha, cfg.df_convention);

  auto accepted_of_size = [&](int size) {
    std::vector<std::vector<int>> accepted;
    std::vector<int> subset = first_subset(size);
    do {
      try {
        double statistic = 0.0;
        if (cfg.stage_estimator == StageEstimator::Liml) {
          statistic = liml_on(ctx, subset).lambda * ctx.df_factor();
        } else {
          statistic = statistic_on(ctx, subset, tsls_on(ctx, subset));
        }
        if (statistic <= threshold) accepted.push_back(subset);
      } catch (const Error&) {
        // unfittable support: not evidence of acceptance
      }
    } while (next_subset(subset, ctx.d));
    return accepted;
  };

  auto intersect_all = [](const std::vector<std::vector<int>>& sets) {
    std::vector<int> result = sets.front();
    for (std::size_t i = 1; i < sets.size(); ++i) {
      std::vector<int> next;
      std::set_intersection(result.begin(), result.end(), sets[i].begin(),
                            sets[i].end(), std::back_inserter(next));
      result = std::move(next);
    }
    return result;
  };

  if (mode == SubsetMode::FixedSize) {
    require(k >= 1 && k <= ctx.d, ErrorKind::InvalidArgument,
            "fixed-size mode needs k in [1, d]");
    const auto accepted = accepted_of_size(k);
    if (accepted.empty()) return {};
    return intersect_all(accepted);
  }
  for (int s = 1; s <= cfg.s_max; ++s) {
    const auto accepted = accepted_of_size(s);
    if (!accepted.empty()) return intersect_all(accepted);
  }
  return {};
}

FitResult ols_sparse(const Dataset& data, int s_max) {
  data.validate();
  require(data.n() > data.d(), ErrorKind::InvalidSampleSize,
          "best-subset OLS needs n > d");
  require(s_max >= 1 && s_max <= data.d(), ErrorKind::InvalidArgument,
          "s_max must lie in [1, d]");
  const int n = data.n();
  const int d = data.d();
  Eigen::MatrixXd w(n, d + 1);
  w << data.x, data.y;
  const Eigen::MatrixXd gram = w.transpose() * w;
  const double total_ss = gram(d, d);

  auto aic_of = [&](double rss, int s) {
    return static_cast<double>(n) *
               std::log(std::max(rss, 1e-300) / static_cast<double>(n)) +
           2.0 * (s + 1);
  };

  double best_aic = aic_of(total_ss, 0);  // empty support, beta = 0
  std::vector<int> best_support;
  Eigen::VectorXd best_beta_s(0);
  for (int s = 1; s <= s_max; ++s) {
    std::vector<int> subset = first_subset(s);
    do {
      const std::vector<int> idx = subset;
      Eigen::MatrixXd design(s, s);
      Eigen::VectorXd target(s);
      for (int r = 0; r < s; ++r) {
        for (int c = 0; c < s; ++c) design(r, c) = gram(idx[r], idx[c]);
        target(r) = gram(idx[r], d);
      }
      if (linalg::reciprocal_condition(design) <= 1e-12) continue;  // skipped
      const Eigen::VectorXd beta_s = design.ldlt().solve(target);
      const double rss = std::max(total_ss - target.dot(beta_s), 0.0);
      const double aic = aic_of(rss, s);
      if (aic < best_aic) {
        best_aic = aic;
        best_support = subset;
        best_beta_s = beta_s;
      }
    } while (next_subset(subset, d));
  }
  return finish_fit(expand(best_support, best_beta_s, d), best_aic,
                    std::numeric_limits<double>::infinity(), true, {});
}

FitResult oracle_fit(const Dataset& data, const std::vector<int>& pa,
                     OracleMode mode) {
  data.validate();
  const Eigen::MatrixXd moments =
      linalg::sample_cross_covariance(data.inst, data.x);
  const Eigen::VectorXd target =
      linalg::sample_cross_covariance(data.inst, data.y);
  return oracle_from_moments(moments, target, pa, mode);
}

FitResult oracle_fit(const Scm& scm, const std::vector<int>& pa,
                     OracleMode mode) {
  const Eigen::MatrixXd cov_inst =
      population_instrument_covariance(scm.noise().instrument_law, scm.m());
  const Eigen::MatrixXd moments = cov_inst * scm.total_effects();
  const Eigen::VectorXd target = moments * scm.beta_star();
  return oracle_from_moments(moments, target, pa, mode);
}

}  // namespace spaceiv
