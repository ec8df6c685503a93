#include "pdsel/numerics.hpp"

#include <cmath>

namespace pdsel {

void ensure_finite(const RealMatrix& m, const std::string& name) {
  if (!m.allFinite()) throw argument_error(name + " contains non-finite entries");
}

void ensure_finite(const RealVector& v, const std::string& name) {
  if (!v.allFinite()) throw argument_error(name + " contains non-finite entries");
}

namespace {

OlsFit empty_design_fit(const RealVector& y) {
  OlsFit fit;
  fit.coefficients = RealVector::Zero(0);
  fit.fitted = RealVector::Zero(y.size());
  fit.residuals = y;
  fit.leverage = RealVector::Zero(y.size());
  fit.rank = 0;
  return fit;
}

OlsFit svd_min_norm_fit(const RealMatrix& X, const RealVector& y) {
  Eigen::BDCSVD<RealMatrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) {
    OlsFit fit;
    fit.coefficients = RealVector::Zero(X.cols());
    fit.fitted = RealVector::Zero(y.size());
    fit.residuals = y;
    fit.leverage = RealVector::Zero(y.size());
    fit.rank = 0;
    return fit;
  }
  const double tol =
      static_cast<double>(std::max(X.rows(), X.cols())) * s(0) * 1e-12;

  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++rank;

  RealVector uty = svd.matrixU().transpose() * y;
  RealVector scaled = RealVector::Zero(s.size());
  for (Index i = 0; i < rank; ++i) scaled(i) = uty(i) / s(i);

  OlsFit fit;
  fit.coefficients = svd.matrixV() * scaled;
  fit.fitted = X * fit.coefficients;
  fit.residuals = y - fit.fitted;
  fit.leverage = svd.matrixU().leftCols(rank).rowwise().squaredNorm();
  fit.rank = rank;
  return fit;
}

}  // namespace

OlsFit ols_fit(const RealMatrix& X, const RealVector& y) {
  if (X.rows() != y.size())
    throw argument_error("ols_fit: X has " + std::to_string(X.rows()) +
                         " rows but y has " + std::to_string(y.size()));
  if (X.rows() < 1) throw argument_error("ols_fit: need at least one row");
  if (X.cols() == 0) return empty_design_fit(y);

  Eigen::ColPivHouseholderQR<RealMatrix> qr(X);
  if (qr.rank() < X.cols()) return svd_min_norm_fit(X, y);

  OlsFit fit;
  fit.coefficients = qr.solve(y);
  fit.fitted = X * fit.coefficients;
  fit.residuals = y - fit.fitted;
  RealMatrix thin_q =
      qr.householderQ() * RealMatrix::Identity(X.rows(), X.cols());
  fit.leverage = thin_q.rowwise().squaredNorm();
  fit.rank = X.cols();
  return fit;
}

double normal_cdf(double z) {
  if (std::isnan(z)) throw argument_error("normal_cdf: z is NaN");
  return 0.5 * std::erfc(-z * M_SQRT1_2);
}

// Wichura-style rational approximation (split at |p-0.5| <= 0.425 and two
// tail regimes), relative error around 1e-15 over (0,1).
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw argument_error("normal_quantile: p must lie in (0,1)");

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }

  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -val : val;
}

RealMatrix toeplitz_correlation_factor(Index p, double rho) {
  if (p < 1) throw argument_error("toeplitz_correlation_factor: p must be >= 1");
  if (!(std::abs(rho) < 1.0))
    throw argument_error("toeplitz_correlation_factor: |rho| must be < 1");

  RealMatrix L = RealMatrix::Zero(p, p);
  const double scale = std::sqrt(1.0 - rho * rho);
  for (Index i = 0; i < p; ++i) {
    L(i, 0) = std::pow(rho, static_cast<double>(i));
    for (Index j = 1; j <= i; ++j)
      L(i, j) = std::pow(rho, static_cast<double>(i - j)) * scale;
  }
  return L;
}

}  // namespace pdsel
