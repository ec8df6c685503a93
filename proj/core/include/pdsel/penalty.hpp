#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pdsel/lasso.hpp"
#include "pdsel/numerics.hpp"

namespace pdsel {

enum class Selector {
  IteratedLasso,
  SqrtLassoHomoscedastic,
  SqrtLassoConservative,
  SqrtLassoIterated,
};

// CLI spellings: iterated-lasso, sqrt-lasso-homoscedastic,
// sqrt-lasso-conservative, sqrt-lasso-iterated.
std::string selector_name(Selector selector);
Selector selector_from_name(const std::string& name);

struct PenaltyConfig {
  double c = 1.1;
  double gamma = 0.05;
  Selector selector = Selector::IteratedLasso;
  std::size_t max_loading_iterations = 15;  // K
  double loading_tolerance = 1e-8;          // nu
  std::vector<Index> initial_set;           // I0; callers put the intercept here
};

struct LoadingEstimate {
  RealVector loadings;
  std::size_t iterations = 0;
  LassoFit final_fit;                 // solved at the final loadings
  std::vector<double> history;        // max loading change per iteration
  bool converged = false;             // terminal change <= loading_tolerance
};

// Penalty levels. lasso_lambda = 2 c sqrt(n) Phi^{-1}(1 - gamma/2p);
// sqrt_lasso_lambda is exactly half of it.
double lasso_lambda(Index n, Index p, double c, double gamma);
double sqrt_lasso_lambda(Index n, Index p, double c, double gamma);

// sqrt(En[x_j^2 r^2]) with r the OLS residuals of y on X[I0]; an empty I0
// means r = y.
RealVector initial_loadings(const RealMatrix& X, const RealVector& y,
                            const std::vector<Index>& I0);

// Homoscedastic rule sqrt(En[x_j^2]) and conservative bound 2 (En[x_j^4])^{1/4}.
RealVector sqrt_lasso_homoscedastic_loadings(const RealMatrix& X);
RealVector sqrt_lasso_conservative_loadings(const RealMatrix& X);

// Floor degenerate loadings at 1e-6 * max_j loading so no coordinate becomes
// unpenalized by accident; all-zero loadings fall back to 1e-6 * max column
// rms (or 1e-6 if X is identically zero). Indices in `unpenalized` are pinned
// at exactly 0 and ignored by the floor.
RealVector floored_loadings(RealVector raw, const RealMatrix& X,
                            const std::vector<Index>& unpenalized = {});

// Iterative loading estimation: alternate a penalized fit at the current
// loadings, a least-squares refit on its support, and a loading update from
// the refit residuals. Stops when the max loading change is <= the tolerance
// or after max_loading_iterations + 1 rounds. The lasso update multiplies the
// cross-moment roots by sqrt(n/(n - s)) with s the support size; the
// square-root variant divides by the residual rms instead and starts from the
// conservative loadings. `unpenalized` coordinates keep loading 0 throughout
// and are excluded from the change metric. An optional shared Gram matrix
// speeds up repeated solves on the same design.
LoadingEstimate iterate_loadings_lasso(
    const RealMatrix& X, const RealVector& y, double lambda,
    const PenaltyConfig& config, const std::vector<Index>& unpenalized = {},
    std::shared_ptr<const RealMatrix> gram = nullptr);
LoadingEstimate iterate_loadings_sqrt(
    const RealMatrix& X, const RealVector& y, double lambda,
    const PenaltyConfig& config, const std::vector<Index>& unpenalized = {},
    std::shared_ptr<const RealMatrix> gram = nullptr);

// Dispatch on config.selector; one-shot selectors report iterations = 0 and
// an empty history. `lambda` must be the level matching the selector family.
LoadingEstimate estimate_loadings(
    const RealMatrix& X, const RealVector& y, double lambda,
    const PenaltyConfig& config, const std::vector<Index>& unpenalized = {},
    std::shared_ptr<const RealMatrix> gram = nullptr);

// Penalty level for config.selector's objective family at the given problem size.
double penalty_level(Index n, Index p, const PenaltyConfig& config);

}  // namespace pdsel
