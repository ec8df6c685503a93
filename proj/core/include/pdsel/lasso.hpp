#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "pdsel/numerics.hpp"

namespace pdsel {

enum class ObjectiveKind { Lasso, SqrtLasso };

/// Weighted-penalty program on the En (divide-by-n) scale:
///   Lasso:      min En[(y - x'b)^2]       + (lambda/n) * sum_j l_j |b_j|
///   SqrtLasso:  min sqrt(En[(y - x'b)^2]) + (lambda/n) * sum_j l_j |b_j|
/// A loading of exactly 0 leaves that coefficient unpenalized.
struct LassoProblem {
  RealMatrix X;
  RealVector y;
  double lambda = 0.0;
  RealVector loadings;
  ObjectiveKind kind = ObjectiveKind::Lasso;
  // Optional precomputed X'X/n, shareable across problems with the same X.
  std::shared_ptr<const RealMatrix> gram;
};

struct SolverOptions {
  double tolerance = 1e-7;            // KKT certificate bound
  double coef_tolerance = 1e-10;      // sweep max coefficient change, scaled by 1+|beta|_inf
  std::size_t max_sweeps = 10000;
  double residual_floor_rel = 1e-10;  // sqrt-lasso rms floor, relative to rms(y)
  enum class Mode { Auto, Covariance, Streaming } mode = Mode::Auto;
  std::optional<RealVector> warm_start;
};

struct LassoFit {
  RealVector beta;
  std::vector<Index> support;   // ascending indices with beta_j != 0
  double objective = 0.0;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;   // completed coordinate-descent sweeps
  bool converged = false;
  std::vector<double> objective_history;  // objective after each sweep
};

// Cyclic coordinate descent. Covariance updates (precomputed Gram) when
// p <= 1000 or a Gram is supplied; streaming inner products otherwise.
LassoFit solve_lasso(const LassoProblem& problem, const SolverOptions& options = {});

// Same machinery on the square-root objective; each univariate update has a
// closed form involving the current residual norm. A residual norm that
// collapses below the floor ends the solve flagged converged, with the
// objective evaluated at the floor.
LassoFit solve_sqrt_lasso(const LassoProblem& problem, const SolverOptions& options = {});

// Maximum subgradient violation of the problem's optimality conditions at
// beta, recomputed from the data (independent of any solver state).
// Lasso, inactive j:   max(0, |2 En[x_j r]| - (lambda/n) l_j)
// Lasso, active j:     |2 En[x_j r] - sign(b_j) (lambda/n) l_j|
// SqrtLasso divides En[x_j r] by the (floored) residual rms instead of doubling.
double kkt_residual(const LassoProblem& problem, const RealVector& beta);

// OLS of y on the columns of X listed in support; an empty support yields the
// zero fit (fitted = 0, residuals = y).
OlsFit post_lasso_refit(const RealMatrix& X, const RealVector& y,
                        const std::vector<Index>& support);

// Scatter coefficients indexed by support back into a length-p vector.
RealVector scatter_coefficients(const std::vector<Index>& support,
                                const RealVector& coefficients, Index p);

}  // namespace pdsel
