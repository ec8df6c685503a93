#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdsel/numerics.hpp"

namespace pdsel {

struct SparseEigReport {
  Index m = 0;
  double phi_min = 0.0;
  double phi_max = 0.0;
  std::string method;            // "exact-enumeration" or "full-spectrum"
  std::uint64_t subsets = 0;     // principal submatrices examined
};

// Extreme eigenvalues of M over all size-m principal submatrices (the min of
// lambda_min and max of lambda_max), which equal the extreme Rayleigh
// quotients over m-sparse unit vectors. m = p short-circuits to one full
// eigendecomposition. Enumeration beyond `cap` subsets is refused rather than
// approximated.
SparseEigReport sparse_eigenvalues(const RealMatrix& M, Index m,
                                   std::uint64_t cap = 200000);

// sup_t |F_n(t) - Phi(t)| for the empirical CDF F_n of the samples.
double ks_distance_to_normal(const std::vector<double>& samples);

}  // namespace pdsel
