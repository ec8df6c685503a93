#pragma once

// Test-side reference implementations, kept deliberately independent of the
// library's numerical choices: the normal CDF is computed by quadrature (the
// library uses erfc), its inverse by bisection (the library uses a rational
// approximation), and the penalized solvers are checked against exhaustive
// stationary-point enumeration and derivative-free coordinate search.

#include <cstdint>
#include <random>
#include <vector>

#include <pdsel/numerics.hpp>

namespace oracles {

using pdsel::Index;
using pdsel::RealMatrix;
using pdsel::RealVector;

// Phi(z) via adaptive Simpson integration of the density; |error| < 1e-13.
double normal_cdf(double z);

// Phi^{-1}(p) by bisection on the quadrature CDF; |error| < 1e-10.
double normal_quantile(double p);

// Exact minimum of En[(y-Xb)^2] + (lambda/n) sum l_j |b_j| over b, found by
// solving the stationarity system for every sign pattern in {-1,0,+1}^p and
// keeping the candidates whose signs are self-consistent. Requires p <= 12.
double lasso_best_objective(const RealMatrix& X, const RealVector& y,
                            double lambda, const RealVector& loadings);

// Minimum of sqrt(En[(y-Xb)^2]) + (lambda/n) sum l_j |b_j| by cyclic
// golden-section coordinate search (convex, so the search is global).
double sqrt_lasso_best_objective(const RealMatrix& X, const RealVector& y,
                                 double lambda, const RealVector& loadings);

// Same search applied to the plain lasso objective; cross-checks
// lasso_best_objective on small instances.
double lasso_best_objective_search(const RealMatrix& X, const RealVector& y,
                                   double lambda, const RealVector& loadings);

// Subgradient-condition violations recomputed from scratch.
double lasso_kkt(const RealMatrix& X, const RealVector& y, double lambda,
                 const RealVector& loadings, const RealVector& beta);
double sqrt_lasso_kkt(const RealMatrix& X, const RealVector& y, double lambda,
                      const RealVector& loadings, const RealVector& beta);

// HC3 variance of one coefficient via the explicit inverse formula; requires
// W'W invertible.
double hc3_variance(const RealMatrix& W, const RealVector& residuals,
                    Index coefficient);

// n x p matrix with orthonormal columns under En[.] (X'X/n = I), built from
// the QR factorization of a random matrix. Requires n >= p.
RealMatrix orthonormal_design(Index n, Index p, std::mt19937_64& rng);

// Random symmetric PSD matrix G'G/r with r >= p rows.
RealMatrix random_psd(Index p, std::mt19937_64& rng);

RealMatrix random_matrix(Index n, Index p, std::mt19937_64& rng);
RealVector random_vector(Index n, std::mt19937_64& rng);

}  // namespace oracles
