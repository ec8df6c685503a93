#include "pdsel/double_selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include <Eigen/SVD>

#include "pdsel/errors.hpp"
#include "pdsel/lasso.hpp"

namespace pdsel {

namespace {

void check_triple(const RealVector& y, const RealVector& d, const RealMatrix& X) {
  if (y.size() != X.rows() || d.size() != X.rows())
    throw argument_error("y, d, and X must agree on the number of rows");
  if (X.rows() < 2) throw argument_error("need at least two observations");
  ensure_finite(y, "y");
  ensure_finite(d, "d");
  ensure_finite(X, "X");
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw argument_error("confidence level must lie in (0, 1)");
}

std::vector<Index> sorted_unique(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<Index> union_of(const std::vector<Index>& a,
                            const std::vector<Index>& b,
                            const std::vector<Index>& c) {
  std::vector<Index> all;
  all.reserve(a.size() + b.size() + c.size());
  all.insert(all.end(), a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  all.insert(all.end(), c.begin(), c.end());
  return sorted_unique(std::move(all));
}

RealMatrix columns(const RealMatrix& X, const std::vector<Index>& idx) {
  RealMatrix out(X.rows(), static_cast<Index>(idx.size()));
  for (Index k = 0; k < out.cols(); ++k)
    out.col(k) = X.col(idx[static_cast<std::size_t>(k)]);
  return out;
}

std::shared_ptr<const RealMatrix> maybe_gram(const RealMatrix& X) {
  if (X.cols() > 1000) return nullptr;
  return std::make_shared<const RealMatrix>((X.transpose() * X) /
                                            static_cast<double>(X.rows()));
}

// Joint OLS on [d, X[joined]] plus both variance estimates; shared by the
// double- and single-selection entry points once the joined set is fixed.
TreatmentEffectEstimate finalize_estimate(const RealVector& y,
                                          const RealVector& d,
                                          const RealMatrix& X,
                                          SelectionSets selection,
                                          double level) {
  const Index n = X.rows();
  const Index p = X.cols();
  const Index s = static_cast<Index>(selection.joined.size());
  if (s + 1 >= n) throw estimation_error("selected model exhausts sample");

  RealMatrix W(n, s + 1);
  W.col(0) = d;
  for (Index k = 0; k < s; ++k)
    W.col(k + 1) = X.col(selection.joined[static_cast<std::size_t>(k)]);

  const OlsFit joint = ols_fit(W, y);
  const OlsFit treatment_fit = post_lasso_refit(X, d, selection.joined);

  TreatmentEffectEstimate est;
  est.n = n;
  est.p = p;
  est.level = level;
  est.selection = std::move(selection);
  est.alpha_hat = joint.coefficients(0);
  est.beta_hat =
      scatter_coefficients(est.selection.joined, joint.coefficients.tail(s), p);
  est.rank_deficient = joint.rank < W.cols();

  est.v_hat = treatment_fit.residuals;
  const double env2 = est.v_hat.squaredNorm() / n;
  if (env2 < 1e-12)
    throw estimation_error("treatment fully explained by selected controls");

  const double inflate =
      std::sqrt(static_cast<double>(n) / static_cast<double>(n - s - 1));
  est.zeta_hat = joint.residuals * inflate;

  est.sigma_n = std::sqrt(plugin_variance(est.v_hat, est.zeta_hat));
  est.se_plugin = est.sigma_n / std::sqrt(static_cast<double>(n));
  est.se_jackknife = std::sqrt(jackknife_variance(W, joint.residuals, 0));

  est.ci_plugin = confidence_interval(est.alpha_hat, est.sigma_n, n, level);
  const double q = normal_quantile(1.0 - (1.0 - level) / 2.0);
  est.ci_jackknife = {est.alpha_hat - q * est.se_jackknife,
                      est.alpha_hat + q * est.se_jackknife};
  return est;
}

}  // namespace

std::vector<Index> select_controls(const RealMatrix& X, const RealVector& target,
                                   const PenaltyConfig& config,
                                   std::shared_ptr<const RealMatrix> gram) {
  if (target.size() != X.rows())
    throw argument_error("target length does not match design rows");
  const double lambda = penalty_level(X.rows(), X.cols(), config);
  const LoadingEstimate est =
      estimate_loadings(X, target, lambda, config, {}, std::move(gram));
  return est.final_fit.support;
}

TreatmentEffectEstimate post_double_selection(const RealVector& y,
                                              const RealVector& d,
                                              const RealMatrix& X,
                                              const std::vector<Index>& amelioration,
                                              const PenaltyConfig& config,
                                              double level) {
  check_triple(y, d, X);
  check_level(level);
  for (Index j : amelioration)
    if (j < 0 || j >= X.cols())
      throw argument_error("amelioration index out of range");

  auto gram = maybe_gram(X);
  SelectionSets sel;
  sel.treatment = select_controls(X, d, config, gram);
  sel.outcome = select_controls(X, y, config, gram);
  sel.amelioration = sorted_unique(amelioration);
  sel.joined = union_of(sel.treatment, sel.outcome, sel.amelioration);
  return finalize_estimate(y, d, X, std::move(sel), level);
}

TreatmentEffectEstimate post_single_selection(const RealVector& y,
                                              const RealVector& d,
                                              const RealMatrix& X,
                                              const PenaltyConfig& config,
                                              double level) {
  check_triple(y, d, X);
  check_level(level);

  const Index n = X.rows();
  const Index p = X.cols();
  RealMatrix S(n, p + 1);
  S.col(0) = d;
  S.rightCols(p) = X;

  // Column indices shift by one inside the stacked design; d itself leads the
  // initial refit set and carries no penalty.
  PenaltyConfig shifted = config;
  shifted.initial_set.clear();
  shifted.initial_set.push_back(0);
  for (Index j : config.initial_set) {
    if (j < 0 || j >= p) throw argument_error("initial set index out of range");
    shifted.initial_set.push_back(j + 1);
  }

  const double lambda = penalty_level(n, S.cols(), shifted);
  const LoadingEstimate est =
      estimate_loadings(S, y, lambda, shifted, {0}, maybe_gram(S));

  SelectionSets sel;
  for (Index j : est.final_fit.support)
    if (j >= 1) sel.outcome.push_back(j - 1);
  sel.joined = sel.outcome;
  return finalize_estimate(y, d, X, std::move(sel), level);
}

double plugin_variance(const RealVector& v_hat, const RealVector& zeta_hat) {
  if (v_hat.size() != zeta_hat.size())
    throw argument_error("v_hat and zeta_hat lengths differ");
  const Index n = v_hat.size();
  if (n < 2) throw argument_error("need at least two observations");
  const double denom = v_hat.squaredNorm() / n;
  if (denom <= 0.0)
    throw estimation_error("En[v^2] is zero: variance undefined");
  const double num = v_hat.cwiseProduct(zeta_hat).squaredNorm() / n;
  return num / (denom * denom);
}

double jackknife_variance(const RealMatrix& W, const RealVector& residuals,
                          Index coefficient) {
  const Index n = W.rows();
  const Index k = W.cols();
  if (residuals.size() != n)
    throw argument_error("residual length does not match design rows");
  if (coefficient < 0 || coefficient >= k)
    throw argument_error("coefficient index out of range");

  Eigen::BDCSVD<RealMatrix> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  const double tol =
      sv.size() > 0 ? std::max(n, k) * sv(0) * 1e-12 : 0.0;
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  if (rank == 0) throw estimation_error("design has rank zero");

  const auto U = svd.matrixU().leftCols(rank);
  const auto V = svd.matrixV().leftCols(rank);
  // Row `coefficient` of the pseudo-inverse V S^{-1} U'.
  const RealVector a =
      U * V.row(coefficient).transpose().cwiseQuotient(sv.head(rank));

  double variance = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double h = U.row(i).squaredNorm();
    if (h >= 1.0 - 1e-10)
      throw estimation_error("leverage one: jackknife variance undefined");
    const double w = residuals(i) / (1.0 - h);
    variance += a(i) * a(i) * w * w;
  }
  return variance;
}

std::vector<double> default_ridge_grid(Index n, Index p) {
  if (n >= 2 * p)
    return {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
  return {1e1, 3e1, 1e2, 3e2, 1e3, 3e3, 1e4};
}

namespace {

// Shrinkage factor s/(s^2 + kappa m), with a pseudo-inverse cutoff when the
// penalty vanishes.
double ridge_factor(double s, double penalty, double s0) {
  const double denom = s * s + penalty;
  if (denom <= 0.0) return 0.0;
  if (penalty == 0.0 && s <= 1e-12 * s0) return 0.0;
  return s / denom;
}

struct ridge_block {
  RealMatrix X;
  RealVector y;
  RealVector col_mean;  // empty when not centering
  double y_mean = 0.0;
  bool centered = false;
};

ridge_block make_block(const RealMatrix& X, const RealVector& y,
                       const std::vector<Index>& rows, bool centered) {
  ridge_block b;
  b.centered = centered;
  b.X.resize(static_cast<Index>(rows.size()), X.cols());
  b.y.resize(static_cast<Index>(rows.size()));
  for (Index i = 0; i < b.y.size(); ++i) {
    b.X.row(i) = X.row(rows[static_cast<std::size_t>(i)]);
    b.y(i) = y(rows[static_cast<std::size_t>(i)]);
  }
  if (centered) {
    b.col_mean = b.X.colwise().mean();
    b.X.rowwise() -= b.col_mean.transpose();
    b.y_mean = b.y.mean();
    b.y.array() -= b.y_mean;
  }
  return b;
}

}  // namespace

RidgeCvFit ridge_cv_fit(const RealMatrix& X, const RealVector& y,
                        std::size_t folds, const std::vector<double>& grid_in,
                        RngStream& stream) {
  const Index n = X.rows();
  if (y.size() != n)
    throw argument_error("response length does not match design rows");
  if (folds < 2) throw argument_error("need at least two folds");
  if (static_cast<Index>(folds) > n)
    throw argument_error("more folds than observations");
  const std::vector<double> grid =
      grid_in.empty() ? default_ridge_grid(n, X.cols()) : grid_in;
  for (double kappa : grid)
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
      throw argument_error("ridge penalties must be finite and nonnegative");
  ensure_finite(X, "X");
  ensure_finite(y, "y");

  // An exactly constant nonzero column acts as an intercept: fit on centered
  // data so that level is unpenalized.
  bool centered = false;
  for (Index j = 0; j < X.cols() && !centered; ++j) {
    const double first = X(0, j);
    centered = first != 0.0 && (X.col(j).array() == first).all();
  }

  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Index i = n - 1; i > 0; --i)
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(stream.below(
                  static_cast<std::uint64_t>(i) + 1))]);
  std::vector<std::size_t> fold_of(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    fold_of[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
        static_cast<std::size_t>(i) % folds;

  std::vector<double> cv_errors(grid.size(), 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<Index> train, test;
    for (Index i = 0; i < n; ++i)
      (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    if (test.empty()) continue;

    const ridge_block tr = make_block(X, y, train, centered);
    const ridge_block te = make_block(X, y, test, false);
    Eigen::BDCSVD<RealMatrix> svd(tr.X,
                                  Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    const double s0 = sv.size() > 0 ? sv(0) : 0.0;
    const RealVector uty = svd.matrixU().transpose() * tr.y;
    const double m = static_cast<double>(train.size());

    for (std::size_t g = 0; g < grid.size(); ++g) {
      RealVector scaled(sv.size());
      for (Index i = 0; i < sv.size(); ++i)
        scaled(i) = ridge_factor(sv(i), grid[g] * m, s0) * uty(i);
      const RealVector b = svd.matrixV() * scaled;
      RealVector pred = te.X * b;
      if (centered) {
        pred.array() += tr.y_mean - tr.col_mean.dot(b);
      }
      cv_errors[g] += (te.y - pred).squaredNorm();
    }
  }
  for (double& e : cv_errors) e /= static_cast<double>(n);

  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (cv_errors[g] < cv_errors[best]) best = g;

  std::vector<Index> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  const ridge_block full = make_block(X, y, all, centered);
  Eigen::BDCSVD<RealMatrix> svd(full.X,
                                Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  const double s0 = sv.size() > 0 ? sv(0) : 0.0;
  RealVector scaled = svd.matrixU().transpose() * full.y;
  for (Index i = 0; i < sv.size(); ++i)
    scaled(i) *= ridge_factor(sv(i), grid[best] * static_cast<double>(n), s0);

  RidgeCvFit fit;
  fit.fitted = full.X * (svd.matrixV() * scaled);
  if (centered) fit.fitted.array() += full.y_mean;
  fit.kappa = grid[best];
  fit.cv_errors = std::move(cv_errors);
  return fit;
}

TreatmentEffectEstimate post_double_selection_ridge(
    const RealVector& y, const RealVector& d, const RealMatrix& X,
    const std::vector<Index>& amelioration, const PenaltyConfig& config,
    double level, const RidgeCvSpec& cv, RngStream& stream) {
  check_triple(y, d, X);
  check_level(level);
  const RidgeCvFit ridge = ridge_cv_fit(X, d, cv.folds, cv.grid, stream);
  RealMatrix augmented(X.rows(), X.cols() + 1);
  augmented.leftCols(X.cols()) = X;
  augmented.col(X.cols()) = ridge.fitted;
  return post_double_selection(y, d, augmented, amelioration, config, level);
}

Interval confidence_interval(double alpha_hat, double se, Index n, double level) {
  check_level(level);
  if (n < 1) throw argument_error("n must be at least 1");
  if (!(se >= 0.0) || !std::isfinite(se))
    throw argument_error("standard error must be finite and nonnegative");
  const double q = normal_quantile(1.0 - (1.0 - level) / 2.0);
  const double half = q * se / std::sqrt(static_cast<double>(n));
  return {alpha_hat - half, alpha_hat + half};
}

}  // namespace pdsel
