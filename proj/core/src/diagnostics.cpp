#include "pdsel/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "pdsel/errors.hpp"

namespace pdsel {

namespace {

// Exact C(p, m) in base-1e9 limbs: the running product C(p,k) stays integral
// through alternating multiply/divide steps.
struct big_uint {
  std::vector<std::uint32_t> limbs{1};  // little-endian, base 1e9

  void multiply(std::uint64_t f) {
    std::uint64_t carry = 0;
    for (auto& limb : limbs) {
      const std::uint64_t cur = static_cast<std::uint64_t>(limb) * f + carry;
      limb = static_cast<std::uint32_t>(cur % 1000000000ULL);
      carry = cur / 1000000000ULL;
    }
    while (carry) {
      limbs.push_back(static_cast<std::uint32_t>(carry % 1000000000ULL));
      carry /= 1000000000ULL;
    }
  }

  void divide(std::uint64_t d) {  // exact by construction
    std::uint64_t rem = 0;
    for (std::size_t i = limbs.size(); i-- > 0;) {
      const std::uint64_t cur = rem * 1000000000ULL + limbs[i];
      limbs[i] = static_cast<std::uint32_t>(cur / d);
      rem = cur % d;
    }
    while (limbs.size() > 1 && limbs.back() == 0) limbs.pop_back();
  }

  // 0 signals overflow; genuine binomial counts are always >= 1.
  std::uint64_t to_u64_clamped() const {
    unsigned __int128 v = 0;
    for (std::size_t i = limbs.size(); i-- > 0;) {
      v = v * 1000000000u + limbs[i];
      if (v > static_cast<unsigned __int128>(~0ULL)) return 0;  // too big
    }
    return static_cast<std::uint64_t>(v);
  }

  std::string str() const {
    std::string out = std::to_string(limbs.back());
    for (std::size_t i = limbs.size() - 1; i-- > 0;) {
      std::string part = std::to_string(limbs[i]);
      out += std::string(9 - part.size(), '0') + part;
    }
    return out;
  }
};

big_uint binomial(Index p, Index m) {
  big_uint c;
  if (m > p - m) m = p - m;
  for (Index k = 0; k < m; ++k) {
    c.multiply(static_cast<std::uint64_t>(p - k));
    c.divide(static_cast<std::uint64_t>(k + 1));
  }
  return c;
}

}  // namespace

SparseEigReport sparse_eigenvalues(const RealMatrix& M, Index m,
                                   std::uint64_t cap) {
  const Index p = M.rows();
  if (M.cols() != p) throw argument_error("matrix must be square");
  if (p < 1) throw argument_error("matrix must be nonempty");
  if (m < 1 || m > p) throw argument_error("m must lie in [1, p]");
  ensure_finite(M, "M");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw argument_error("matrix must be symmetric");

  const big_uint count = binomial(p, m);
  const std::uint64_t count64 = count.to_u64_clamped();
  if (count64 == 0 || count64 > cap)
    throw capacity_error("sparse eigenvalue enumeration needs " + count.str() +
                         " subsets, above the cap of " + std::to_string(cap));

  SparseEigReport report;
  report.m = m;
  report.method = m == p ? "full-spectrum" : "exact-enumeration";

  std::vector<Index> idx(static_cast<std::size_t>(m));
  for (Index k = 0; k < m; ++k) idx[static_cast<std::size_t>(k)] = k;
  RealMatrix sub(m, m);
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig;
  double phi_min = std::numeric_limits<double>::infinity();
  double phi_max = -std::numeric_limits<double>::infinity();

  while (true) {
    for (Index a = 0; a < m; ++a)
      for (Index b = 0; b < m; ++b)
        sub(a, b) = M(idx[static_cast<std::size_t>(a)],
                      idx[static_cast<std::size_t>(b)]);
    eig.compute(sub, Eigen::EigenvaluesOnly);
    phi_min = std::min(phi_min, eig.eigenvalues().minCoeff());
    phi_max = std::max(phi_max, eig.eigenvalues().maxCoeff());
    ++report.subsets;

    // next combination in lexicographic order
    Index k = m - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == p - m + k) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (Index t = k + 1; t < m; ++t)
      idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
  }

  report.phi_min = phi_min;
  report.phi_max = phi_max;
  return report;
}

double ks_distance_to_normal(const std::vector<double>& samples) {
  if (samples.size() < 2) throw argument_error("need at least two samples");
  for (double s : samples)
    if (!std::isfinite(s)) throw argument_error("samples must be finite");
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = normal_cdf(sorted[i]);
    dist = std::max(dist, std::max(cdf - static_cast<double>(i) / n,
                                   static_cast<double>(i + 1) / n - cdf));
  }
  return dist;
}

}  // namespace pdsel
