#include "pdsel/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pdsel/errors.hpp"

namespace pdsel {

namespace {

double soft_threshold(double b, double t) {
  if (b > t) return b - t;
  if (b < -t) return b + t;
  return 0.0;
}

void validate_problem(const LassoProblem& problem, ObjectiveKind expected) {
  if (problem.kind != expected)
    throw argument_error("problem kind does not match the requested solver");
  const Index n = problem.X.rows();
  const Index p = problem.X.cols();
  if (n < 1) throw argument_error("design matrix needs at least one row");
  if (problem.y.size() != n)
    throw argument_error("response length does not match design rows");
  if (problem.loadings.size() != p)
    throw argument_error("loadings length does not match design columns");
  if (!(problem.lambda >= 0.0) || !std::isfinite(problem.lambda))
    throw argument_error("lambda must be finite and nonnegative");
  ensure_finite(problem.X, "X");
  ensure_finite(problem.y, "y");
  ensure_finite(problem.loadings, "loadings");
  if ((problem.loadings.array() < 0.0).any())
    throw argument_error("loadings must be nonnegative");
  if (problem.gram && (problem.gram->rows() != p || problem.gram->cols() != p))
    throw argument_error("gram matrix has wrong dimensions");
}

// Shared coordinate-descent engine. Covariance mode keeps c = En[x_j r] for
// every j current via rank-one Gram column updates; streaming mode keeps the
// residual vector instead and forms inner products on demand.
class cd_engine {
 public:
  cd_engine(const LassoProblem& problem, const SolverOptions& options)
      : problem_(problem),
        options_(options),
        n_(problem.X.rows()),
        p_(problem.X.cols()) {
    const bool want_cov =
        options.mode == SolverOptions::Mode::Covariance ||
        (options.mode == SolverOptions::Mode::Auto &&
         (problem.gram != nullptr || p_ <= 1000));
    covariance_ = want_cov;

    yty_ = problem.y.squaredNorm() / n_;
    beta_ = RealVector::Zero(p_);
    if (options.warm_start) {
      if (options.warm_start->size() != p_)
        throw argument_error("warm start length does not match design columns");
      ensure_finite(*options.warm_start, "warm_start");
      beta_ = *options.warm_start;
    }

    if (covariance_) {
      if (problem.gram) {
        gram_ = problem.gram;
      } else {
        auto owned = std::make_shared<RealMatrix>(
            (problem.X.transpose() * problem.X) / static_cast<double>(n_));
        gram_ = std::move(owned);
      }
      q_ = gram_->diagonal();
      xty_ = (problem.X.transpose() * problem.y) / static_cast<double>(n_);
      c_ = xty_ - (*gram_) * beta_;
    } else {
      q_.resize(p_);
      for (Index j = 0; j < p_; ++j) q_(j) = problem.X.col(j).squaredNorm() / n_;
      r_ = problem.y - problem.X * beta_;
    }
    refresh_r2();
  }

  // En[x_j r] for the current residual.
  double gradient(Index j) const {
    if (covariance_) return c_(j);
    return problem_.X.col(j).dot(r_) / n_;
  }

  void apply_delta(Index j, double cj, double delta) {
    if (delta == 0.0) return;
    beta_(j) += delta;
    r2_ = r2_ - 2.0 * delta * cj + delta * delta * q_(j);
    if (r2_ < 0.0) r2_ = 0.0;
    if (covariance_)
      c_ -= delta * gram_->col(j);
    else
      r_ -= delta * problem_.X.col(j);
  }

  // Exact En[r^2] from tracked quantities; called once per sweep to stop the
  // incremental value from drifting.
  void refresh_r2() {
    if (covariance_)
      r2_ = yty_ - beta_.dot(xty_) - beta_.dot(c_);
    else
      r2_ = r_.squaredNorm() / n_;
    if (r2_ < 0.0) r2_ = 0.0;
  }

  const RealVector& beta() const { return beta_; }
  double q(Index j) const { return q_(j); }
  double r2() const { return r2_; }
  Index n() const { return n_; }
  Index p() const { return p_; }

 private:
  const LassoProblem& problem_;
  const SolverOptions& options_;
  Index n_, p_;
  bool covariance_ = false;
  std::shared_ptr<const RealMatrix> gram_;
  RealVector q_, xty_, c_, r_, beta_;
  double yty_ = 0.0, r2_ = 0.0;
};

double penalty_value(const LassoProblem& problem, const RealVector& beta) {
  const double scale = problem.lambda / problem.X.rows();
  return scale * problem.loadings.cwiseAbs().dot(beta.cwiseAbs());
}

double objective_value(const LassoProblem& problem, double r2, double floor_abs,
                       const RealVector& beta) {
  if (problem.kind == ObjectiveKind::Lasso)
    return r2 + penalty_value(problem, beta);
  const double rms = std::max(std::sqrt(std::max(r2, 0.0)), floor_abs);
  return rms + penalty_value(problem, beta);
}

LassoFit run_solver(const LassoProblem& problem, const SolverOptions& options) {
  const Index n = problem.X.rows();
  const Index p = problem.X.cols();
  const bool sqrt_mode = problem.kind == ObjectiveKind::SqrtLasso;
  const double floor_abs =
      sqrt_mode ? options.residual_floor_rel *
                      std::sqrt(problem.y.squaredNorm() / n)
                : 0.0;

  LassoFit fit;
  if (p == 0) {
    fit.beta = RealVector(0);
    fit.objective = objective_value(problem, problem.y.squaredNorm() / n,
                                    floor_abs, fit.beta);
    fit.converged = true;
    return fit;
  }

  cd_engine engine(problem, options);
  const double lam_n = problem.lambda / n;

  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double qj = engine.q(j);
      const double old = engine.beta()(j);
      if (qj <= 0.0) {
        // A zero column cannot move the fit; pin its coefficient at zero.
        if (old != 0.0) {
          engine.apply_delta(j, engine.gradient(j), -old);
          max_change = std::max(max_change, std::abs(old));
        }
        continue;
      }
      const double cj = engine.gradient(j);
      const double bj = cj + qj * old;
      const double lj = problem.loadings(j);
      double next = 0.0;
      if (!sqrt_mode) {
        next = lj == 0.0 ? bj / qj : soft_threshold(bj, 0.5 * lam_n * lj) / qj;
      } else if (lj == 0.0) {
        next = bj / qj;
      } else {
        // Partial-residual second moment with coordinate j restored.
        double s2 = engine.r2() + 2.0 * old * cj + old * old * qj;
        if (s2 < 0.0) s2 = 0.0;
        const double s = std::max(std::sqrt(s2), floor_abs);
        const double eta = lam_n * lj;
        if (std::abs(bj) > eta * s) {
          const double denom = 1.0 - eta * eta / qj;
          if (denom > 0.0) {
            const double m = std::sqrt(std::max(s2 - bj * bj / qj, 0.0));
            const double shrink = eta * m / std::sqrt(denom);
            next = (bj - std::copysign(shrink, bj)) / qj;
          }
        }
      }
      const double delta = next - old;
      if (delta != 0.0) {
        engine.apply_delta(j, cj, delta);
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    engine.refresh_r2();
    fit.iterations = sweep;
    fit.objective_history.push_back(
        objective_value(problem, engine.r2(), floor_abs, engine.beta()));

    if (sqrt_mode && std::sqrt(engine.r2()) < floor_abs) {
      fit.converged = true;
      break;
    }
    const double scale = 1.0 + engine.beta().cwiseAbs().maxCoeff();
    if (max_change <= options.coef_tolerance * scale) {
      if (kkt_residual(problem, engine.beta()) <= options.tolerance) {
        fit.converged = true;
        break;
      }
    }
  }

  fit.beta = engine.beta();
  fit.objective = objective_value(problem, engine.r2(), floor_abs, fit.beta);
  fit.kkt_residual = kkt_residual(problem, fit.beta);
  for (Index j = 0; j < p; ++j)
    if (fit.beta(j) != 0.0) fit.support.push_back(j);
  return fit;
}

}  // namespace

LassoFit solve_lasso(const LassoProblem& problem, const SolverOptions& options) {
  validate_problem(problem, ObjectiveKind::Lasso);
  return run_solver(problem, options);
}

LassoFit solve_sqrt_lasso(const LassoProblem& problem,
                          const SolverOptions& options) {
  validate_problem(problem, ObjectiveKind::SqrtLasso);
  return run_solver(problem, options);
}

double kkt_residual(const LassoProblem& problem, const RealVector& beta) {
  const Index n = problem.X.rows();
  const Index p = problem.X.cols();
  if (beta.size() != p)
    throw argument_error("beta length does not match design columns");
  if (p == 0) return 0.0;
  const RealVector r = problem.y - problem.X * beta;
  const RealVector g = (problem.X.transpose() * r) / static_cast<double>(n);
  const double lam_n = problem.lambda / n;
  const bool sqrt_mode = problem.kind == ObjectiveKind::SqrtLasso;
  double denom = 1.0;
  if (sqrt_mode) {
    const double floor_abs =
        1e-10 * std::sqrt(problem.y.squaredNorm() / n);
    denom = std::max(std::sqrt(r.squaredNorm() / n), floor_abs);
    if (denom <= 0.0) denom = std::numeric_limits<double>::min();
  }
  double worst = 0.0;
  for (Index j = 0; j < p; ++j) {
    const double score = sqrt_mode ? g(j) / denom : 2.0 * g(j);
    const double bound = lam_n * problem.loadings(j);
    double violation;
    if (beta(j) == 0.0)
      violation = std::max(0.0, std::abs(score) - bound);
    else
      violation = std::abs(score - std::copysign(bound, beta(j)));
    worst = std::max(worst, violation);
  }
  return worst;
}

OlsFit post_lasso_refit(const RealMatrix& X, const RealVector& y,
                        const std::vector<Index>& support) {
  const Index n = X.rows();
  if (y.size() != n)
    throw argument_error("response length does not match design rows");
  for (Index j : support)
    if (j < 0 || j >= X.cols())
      throw argument_error("support index out of range");
  RealMatrix sub(n, static_cast<Index>(support.size()));
  for (Index k = 0; k < sub.cols(); ++k)
    sub.col(k) = X.col(support[static_cast<std::size_t>(k)]);
  return ols_fit(sub, y);
}

RealVector scatter_coefficients(const std::vector<Index>& support,
                                const RealVector& coefficients, Index p) {
  if (static_cast<Index>(support.size()) != coefficients.size())
    throw argument_error("support and coefficient lengths differ");
  RealVector full = RealVector::Zero(p);
  for (std::size_t k = 0; k < support.size(); ++k) {
    const Index j = support[k];
    if (j < 0 || j >= p) throw argument_error("support index out of range");
    full(j) = coefficients(static_cast<Index>(k));
  }
  return full;
}

}  // namespace pdsel
