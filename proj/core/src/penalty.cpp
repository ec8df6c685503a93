#include "pdsel/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdsel/errors.hpp"

namespace pdsel {

namespace {

void validate_lambda_args(Index n, Index p, double c, double gamma) {
  if (n < 1) throw argument_error("n must be at least 1");
  if (p < 1) throw argument_error("p must be at least 1");
  if (!(c > 1.0) || !std::isfinite(c))
    throw argument_error("slack constant c must exceed 1");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw argument_error("gamma must lie in (0, 1)");
}

double base_level(Index n, Index p, double c, double gamma) {
  return c * std::sqrt(static_cast<double>(n)) *
         normal_quantile(1.0 - gamma / (2.0 * static_cast<double>(p)));
}

void validate_config(const PenaltyConfig& config) {
  if (!(config.c > 1.0) || !std::isfinite(config.c))
    throw argument_error("slack constant c must exceed 1");
  if (!(config.gamma > 0.0 && config.gamma < 1.0))
    throw argument_error("gamma must lie in (0, 1)");
  if (config.max_loading_iterations < 1)
    throw argument_error("max_loading_iterations must be at least 1");
  if (!(config.loading_tolerance >= 0.0))
    throw argument_error("loading_tolerance must be nonnegative");
}

void check_indices(const std::vector<Index>& set, Index p, const char* what) {
  for (Index j : set)
    if (j < 0 || j >= p) throw argument_error(std::string(what) + " index out of range");
}

// sqrt(En[x_j^2 r^2]) per column.
RealVector cross_moment_loadings(const RealMatrix& X, const RealVector& r) {
  const Index n = X.rows();
  RealVector out(X.cols());
  const RealVector r2 = r.cwiseAbs2();
  for (Index j = 0; j < X.cols(); ++j)
    out(j) = std::sqrt(X.col(j).cwiseAbs2().dot(r2) / n);
  return out;
}

bool is_pinned(const std::vector<Index>& unpenalized, Index j) {
  return std::find(unpenalized.begin(), unpenalized.end(), j) !=
         unpenalized.end();
}

struct LoadingRule {
  ObjectiveKind kind;
  // Maps post-refit residuals (and support size) to fresh raw loadings.
  RealVector (*update)(const RealMatrix&, const RealVector&, Index);
  RealVector (*initial)(const RealMatrix&, const RealVector&,
                        const PenaltyConfig&);
};

RealVector lasso_update(const RealMatrix& X, const RealVector& r, Index s) {
  const Index n = X.rows();
  if (n - s <= 0)
    throw estimation_error(
        "selected model too large for the degrees-of-freedom correction");
  const double inflate =
      std::sqrt(static_cast<double>(n) / static_cast<double>(n - s));
  return cross_moment_loadings(X, r) * inflate;
}

RealVector sqrt_update(const RealMatrix& X, const RealVector& r, Index) {
  const double rms = std::sqrt(r.squaredNorm() / X.rows());
  if (rms <= 0.0)
    throw estimation_error("zero post-fit residuals: loadings undefined");
  return cross_moment_loadings(X, r) / rms;
}

RealVector lasso_initial(const RealMatrix& X, const RealVector& y,
                         const PenaltyConfig& config) {
  return initial_loadings(X, y, config.initial_set);
}

RealVector sqrt_initial(const RealMatrix& X, const RealVector&,
                        const PenaltyConfig&) {
  return sqrt_lasso_conservative_loadings(X);
}

LoadingEstimate iterate_loadings(const RealMatrix& X, const RealVector& y,
                                 double lambda, const PenaltyConfig& config,
                                 const std::vector<Index>& unpenalized,
                                 std::shared_ptr<const RealMatrix> gram,
                                 const LoadingRule& rule) {
  validate_config(config);
  check_indices(unpenalized, X.cols(), "unpenalized");

  const auto pin = [&](RealVector& l) {
    for (Index j : unpenalized) l(j) = 0.0;
  };

  LassoProblem problem;
  problem.X = X;
  problem.y = y;
  problem.lambda = lambda;
  problem.kind = rule.kind;
  problem.gram = std::move(gram);

  RealVector raw = rule.initial(X, y, config);
  pin(raw);
  problem.loadings = floored_loadings(raw, X, unpenalized);

  SolverOptions options;
  const auto solve = [&]() {
    return rule.kind == ObjectiveKind::Lasso ? solve_lasso(problem, options)
                                             : solve_sqrt_lasso(problem, options);
  };

  LoadingEstimate estimate;
  estimate.final_fit = solve();

  for (std::size_t k = 1; k <= config.max_loading_iterations + 1; ++k) {
    const OlsFit refit = post_lasso_refit(X, y, estimate.final_fit.support);
    RealVector next = rule.update(X, refit.residuals,
                                  static_cast<Index>(estimate.final_fit.support.size()));
    pin(next);
    next = floored_loadings(std::move(next), X, unpenalized);

    double change = 0.0;
    for (Index j = 0; j < X.cols(); ++j)
      if (!is_pinned(unpenalized, j))
        change = std::max(change, std::abs(next(j) - problem.loadings(j)));

    problem.loadings = std::move(next);
    options.warm_start = estimate.final_fit.beta;
    estimate.final_fit = solve();
    estimate.history.push_back(change);
    estimate.iterations = k;
    if (change <= config.loading_tolerance) {
      estimate.converged = true;
      break;
    }
  }
  estimate.loadings = problem.loadings;
  return estimate;
}

}  // namespace

std::string selector_name(Selector selector) {
  switch (selector) {
    case Selector::IteratedLasso: return "iterated-lasso";
    case Selector::SqrtLassoHomoscedastic: return "sqrt-lasso-homoscedastic";
    case Selector::SqrtLassoConservative: return "sqrt-lasso-conservative";
    case Selector::SqrtLassoIterated: return "sqrt-lasso-iterated";
  }
  throw argument_error("unknown selector");
}

Selector selector_from_name(const std::string& name) {
  if (name == "iterated-lasso") return Selector::IteratedLasso;
  if (name == "sqrt-lasso-homoscedastic") return Selector::SqrtLassoHomoscedastic;
  if (name == "sqrt-lasso-conservative") return Selector::SqrtLassoConservative;
  if (name == "sqrt-lasso-iterated") return Selector::SqrtLassoIterated;
  throw argument_error(
      "unknown selector '" + name +
      "'; valid: iterated-lasso, sqrt-lasso-homoscedastic, "
      "sqrt-lasso-conservative, sqrt-lasso-iterated");
}

double lasso_lambda(Index n, Index p, double c, double gamma) {
  validate_lambda_args(n, p, c, gamma);
  return 2.0 * base_level(n, p, c, gamma);
}

double sqrt_lasso_lambda(Index n, Index p, double c, double gamma) {
  validate_lambda_args(n, p, c, gamma);
  return base_level(n, p, c, gamma);
}

RealVector initial_loadings(const RealMatrix& X, const RealVector& y,
                            const std::vector<Index>& I0) {
  if (y.size() != X.rows())
    throw argument_error("response length does not match design rows");
  check_indices(I0, X.cols(), "initial set");
  const OlsFit base = post_lasso_refit(X, y, I0);
  return cross_moment_loadings(X, base.residuals);
}

RealVector sqrt_lasso_homoscedastic_loadings(const RealMatrix& X) {
  const Index n = X.rows();
  if (n < 1) throw argument_error("design matrix needs at least one row");
  RealVector out(X.cols());
  for (Index j = 0; j < X.cols(); ++j)
    out(j) = std::sqrt(X.col(j).squaredNorm() / n);
  return out;
}

RealVector sqrt_lasso_conservative_loadings(const RealMatrix& X) {
  const Index n = X.rows();
  if (n < 1) throw argument_error("design matrix needs at least one row");
  RealVector out(X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    const double m4 = X.col(j).array().square().square().sum() / n;
    out(j) = 2.0 * std::pow(m4, 0.25);
  }
  return out;
}

RealVector floored_loadings(RealVector raw, const RealMatrix& X,
                            const std::vector<Index>& unpenalized) {
  const Index p = raw.size();
  if (X.cols() != p)
    throw argument_error("loadings length does not match design columns");
  double max_loading = 0.0;
  for (Index j = 0; j < p; ++j)
    if (!is_pinned(unpenalized, j))
      max_loading = std::max(max_loading, raw(j));
  if (max_loading <= 0.0) {
    double max_rms = 0.0;
    for (Index j = 0; j < p; ++j)
      if (!is_pinned(unpenalized, j))
        max_rms = std::max(max_rms,
                           std::sqrt(X.col(j).squaredNorm() / X.rows()));
    const double value = max_rms > 0.0 ? 1e-6 * max_rms : 1e-6;
    for (Index j = 0; j < p; ++j)
      if (!is_pinned(unpenalized, j)) raw(j) = value;
    return raw;
  }
  const double floor = 1e-6 * max_loading;
  for (Index j = 0; j < p; ++j)
    if (!is_pinned(unpenalized, j) && raw(j) < floor) raw(j) = floor;
  return raw;
}

LoadingEstimate iterate_loadings_lasso(const RealMatrix& X, const RealVector& y,
                                       double lambda,
                                       const PenaltyConfig& config,
                                       const std::vector<Index>& unpenalized,
                                       std::shared_ptr<const RealMatrix> gram) {
  if (config.selector != Selector::IteratedLasso)
    throw argument_error("config.selector must be iterated-lasso");
  return iterate_loadings(X, y, lambda, config, unpenalized, std::move(gram),
                          {ObjectiveKind::Lasso, &lasso_update, &lasso_initial});
}

LoadingEstimate iterate_loadings_sqrt(const RealMatrix& X, const RealVector& y,
                                      double lambda,
                                      const PenaltyConfig& config,
                                      const std::vector<Index>& unpenalized,
                                      std::shared_ptr<const RealMatrix> gram) {
  if (config.selector != Selector::SqrtLassoIterated)
    throw argument_error("config.selector must be sqrt-lasso-iterated");
  return iterate_loadings(X, y, lambda, config, unpenalized, std::move(gram),
                          {ObjectiveKind::SqrtLasso, &sqrt_update, &sqrt_initial});
}

LoadingEstimate estimate_loadings(const RealMatrix& X, const RealVector& y,
                                  double lambda, const PenaltyConfig& config,
                                  const std::vector<Index>& unpenalized,
                                  std::shared_ptr<const RealMatrix> gram) {
  switch (config.selector) {
    case Selector::IteratedLasso:
      return iterate_loadings_lasso(X, y, lambda, config, unpenalized,
                                    std::move(gram));
    case Selector::SqrtLassoIterated:
      return iterate_loadings_sqrt(X, y, lambda, config, unpenalized,
                                   std::move(gram));
    case Selector::SqrtLassoHomoscedastic:
    case Selector::SqrtLassoConservative: {
      validate_config(config);
      check_indices(unpenalized, X.cols(), "unpenalized");
      RealVector raw = config.selector == Selector::SqrtLassoHomoscedastic
                           ? sqrt_lasso_homoscedastic_loadings(X)
                           : sqrt_lasso_conservative_loadings(X);
      for (Index j : unpenalized) raw(j) = 0.0;
      LassoProblem problem;
      problem.X = X;
      problem.y = y;
      problem.lambda = lambda;
      problem.loadings = floored_loadings(std::move(raw), X, unpenalized);
      problem.kind = ObjectiveKind::SqrtLasso;
      problem.gram = std::move(gram);
      LoadingEstimate estimate;
      estimate.loadings = problem.loadings;
      estimate.final_fit = solve_sqrt_lasso(problem);
      estimate.converged = true;
      return estimate;
    }
  }
  throw argument_error("unknown selector");
}

double penalty_level(Index n, Index p, const PenaltyConfig& config) {
  return config.selector == Selector::IteratedLasso
             ? lasso_lambda(n, p, config.c, config.gamma)
             : sqrt_lasso_lambda(n, p, config.c, config.gamma);
}

}  // namespace pdsel
