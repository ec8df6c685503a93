#pragma once

#include <memory>
#include <vector>

#include "pdsel/numerics.hpp"
#include "pdsel/penalty.hpp"
#include "pdsel/rng.hpp"

namespace pdsel {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct SelectionSets {
  std::vector<Index> treatment;     // controls selected for predicting d
  std::vector<Index> outcome;       // controls selected for predicting y
  std::vector<Index> amelioration;  // user-forced controls
  std::vector<Index> joined;        // ascending union of the three
};

struct TreatmentEffectEstimate {
  double alpha_hat = 0.0;
  RealVector beta_hat;          // length p; zero off the joined support
  double sigma_n = 0.0;         // sqrt of the sandwich variance, root-n scale
  double se_plugin = 0.0;       // sigma_n / sqrt(n), ready to use
  double se_jackknife = 0.0;    // HC3, ready to use
  double level = 0.0;
  Interval ci_plugin;
  Interval ci_jackknife;
  SelectionSets selection;
  RealVector v_hat;             // treatment residualized on the joined controls
  RealVector zeta_hat;          // outcome residuals * sqrt(n/(n - s - 1))
  Index n = 0;
  Index p = 0;
  bool rank_deficient = false;
};

// Support of the configured penalized regression of target on X, with the
// penalty level implied by X's dimensions and config.
std::vector<Index> select_controls(const RealMatrix& X, const RealVector& target,
                                   const PenaltyConfig& config,
                                   std::shared_ptr<const RealMatrix> gram = nullptr);

// Select controls for the treatment equation and the outcome equation, join
// them with the amelioration set, regress y on [d, X[joined]], and attach both
// the sandwich and the HC3 standard errors with level-sized intervals.
TreatmentEffectEstimate post_double_selection(const RealVector& y,
                                              const RealVector& d,
                                              const RealMatrix& X,
                                              const std::vector<Index>& amelioration,
                                              const PenaltyConfig& config,
                                              double level);

// Single penalized regression of y on [d, X] with d unpenalized, then OLS of
// y on d plus the selected controls. The non-robust comparator.
TreatmentEffectEstimate post_single_selection(const RealVector& y,
                                              const RealVector& d,
                                              const RealMatrix& X,
                                              const PenaltyConfig& config,
                                              double level);

// En[v^2]^{-1} En[v^2 zeta^2] En[v^2]^{-1}.
double plugin_variance(const RealVector& v_hat, const RealVector& zeta_hat);

// HC3: [(W'W)^{-1} W' diag(e_i^2/(1-h_i)^2) W (W'W)^{-1}]_{cc}. Rank-deficient
// designs use the pseudo-inverse. Leverage within 1e-10 of 1 is an error.
double jackknife_variance(const RealMatrix& W, const RealVector& residuals,
                          Index coefficient);

struct RidgeCvSpec {
  std::size_t folds = 10;
  std::vector<double> grid;  // empty -> default_ridge_grid(n, p)
};

// Geometric penalty ladder. Wide (1e-4 .. 1e4) when n >= 2p; when the design is
// close to or beyond square the small end is dropped, because a near-zero
// penalty lets the fitted values reproduce y in sample (the fit interpolates),
// which makes the appended column useless as a control.
std::vector<double> default_ridge_grid(Index n, Index p);

struct RidgeCvFit {
  RealVector fitted;
  double kappa = 0.0;              // grid point with the smallest CV error
  std::vector<double> cv_errors;   // mean squared prediction error per grid point
};

// Ridge fitted values X (X'X + kappa m I)^{-1} X' y, with m the number of rows
// entering each fit; kappa picked by k-fold cross-validation with fold
// assignment drawn from the stream. Exactly-constant columns are treated as an
// unpenalized intercept (fit runs on centered data).
RidgeCvFit ridge_cv_fit(const RealMatrix& X, const RealVector& y,
                        std::size_t folds, const std::vector<double>& grid,
                        RngStream& stream);

// post_double_selection on [X, ridge fit of d on X]; the appended column
// (index p) competes in both selection steps like any other control.
TreatmentEffectEstimate post_double_selection_ridge(
    const RealVector& y, const RealVector& d, const RealMatrix& X,
    const std::vector<Index>& amelioration, const PenaltyConfig& config,
    double level, const RidgeCvSpec& cv, RngStream& stream);

// [alpha_hat -+ q se/sqrt(n)] with q = normal_quantile(1-(1-level)/2); se on
// the root-n (sigma_n) scale.
Interval confidence_interval(double alpha_hat, double se, Index n, double level);

}  // namespace pdsel
