#include <doctest.h>

#include <cmath>
#include <set>

#include <pdsel/errors.hpp>
#include <pdsel/numerics.hpp>
#include <pdsel/rng.hpp>

using namespace pdsel;

TEST_SUITE_BEGIN("rng");

TEST_CASE("identical seed and stream reproduce the sequence bitwise") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c(42, 7), d(42, 7);
  for (int i = 0; i < 1000; ++i) {
    CHECK(c.uniform() == d.uniform());
    CHECK(c.normal() == d.normal());
  }
}

TEST_CASE("distinct streams and seeds differ") {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t va = a.next_u64();
    if (va == b.next_u64()) ++same_ab;
    if (va == c.next_u64()) ++same_ac;
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("uniform lies in the half-open unit interval") {
  RngStream s(1, 0);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);
}

TEST_CASE("below covers the range and rejects zero") {
  RngStream s(9, 3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t v = s.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  CHECK(s.below(1) == 0);
  CHECK_THROWS_AS(s.below(0), argument_error);
}

TEST_CASE("normal moments match the standard normal at scale") {
  RngStream s(2024, 5);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sum2 += z * z;
    sum3 += z * z * z;
    sum4 += z * z * z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sum2 / n - 1.0) < 0.02);
  CHECK(std::abs(sum3 / n) < 0.05);
  CHECK(std::abs(sum4 / n - 3.0) < 0.1);
}

TEST_CASE("gaussian vector uses the factor") {
  SUBCASE("zero factor gives the zero vector") {
    RngStream s(5, 0);
    const RealVector v = sample_gaussian_vector(s, RealMatrix::Zero(3, 3));
    CHECK(v.size() == 3);
    CHECK(v.lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("identity factor reproduces the stream's normals") {
    RngStream s1(5, 2), s2(5, 2);
    const RealVector v = sample_gaussian_vector(s1, RealMatrix::Identity(2, 2));
    CHECK(v(0) == s2.normal());
    CHECK(v(1) == s2.normal());
  }
  SUBCASE("correlated factor induces the target correlation") {
    const RealMatrix factor = toeplitz_correlation_factor(2, 0.5);
    RngStream s(77, 0);
    const int n = 200000;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
      const RealVector v = sample_gaussian_vector(s, factor);
      sx += v(0);
      sy += v(1);
      sxx += v(0) * v(0);
      syy += v(1) * v(1);
      sxy += v(0) * v(1);
    }
    const double mx = sx / n, my = sy / n;
    const double corr = (sxy / n - mx * my) /
                        std::sqrt((sxx / n - mx * mx) * (syy / n - my * my));
    CHECK(std::abs(corr - 0.5) < 0.01);
  }
  SUBCASE("non-square factor is rejected") {
    RngStream s(5, 0);
    CHECK_THROWS_AS(sample_gaussian_vector(s, RealMatrix::Ones(2, 3)),
                    argument_error);
  }
}

TEST_SUITE_END();
