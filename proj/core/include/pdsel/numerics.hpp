#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pdsel/errors.hpp"

namespace pdsel {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Throw argument_error if any entry is NaN or infinite. Used at public entry
// points so downstream code can assume finite data.
void ensure_finite(const RealMatrix& m, const std::string& name);
void ensure_finite(const RealVector& v, const std::string& name);

/// Least squares fit of y on the columns of X.
///
/// Full-rank designs go through column-pivoted QR. If the QR flags rank
/// deficiency the fit is redone via SVD and the minimum-norm solution is
/// returned; singular values below max(rows,cols)*smax*1e-12 count as zero.
/// Fitted values are the orthogonal projection of y onto col(X) either way.
struct OlsFit {
  RealVector coefficients;  // one per column of X
  RealVector fitted;
  RealVector residuals;     // y - fitted
  RealVector leverage;      // diagonal of the hat matrix, entries in [0,1]
  Index rank = 0;
};

OlsFit ols_fit(const RealMatrix& X, const RealVector& y);

// Standard normal CDF, absolute error below 1e-12 (erfc based).
double normal_cdf(double z);

// Standard normal quantile for p in (0,1). Rational approximation accurate to
// ~1e-15 relative; round-trips through normal_cdf to within 1e-9.
double normal_quantile(double p);

// Lower-triangular L with L*L' = Sigma, Sigma_{kj} = rho^{|k-j|}. Uses the
// closed-form AR(1) Cholesky factor: L(i,0) = rho^i, L(i,j) = rho^(i-j)*sqrt(1-rho^2).
// Requires p >= 1 and |rho| < 1.
RealMatrix toeplitz_correlation_factor(Index p, double rho);

}  // namespace pdsel
