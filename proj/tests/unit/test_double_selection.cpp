#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "pdsel/double_selection.hpp"
#include "pdsel/errors.hpp"
#include "pdsel/simulation.hpp"
#include "support/oracles.hpp"

using namespace pdsel;

namespace {

struct TestData {
  RealVector y, d;
  RealMatrix X;
};

// Sparse linear model with confounding: d loads on x0/x1, y on d and x0/x2.
TestData confounded_data(Index n, Index p, std::mt19937_64& rng) {
  TestData data;
  data.X = oracles::random_matrix(n, p, rng);
  data.d = 1.5 * data.X.col(0) - data.X.col(1) + oracles::random_vector(n, rng);
  data.y = 0.5 * data.d + 2.0 * data.X.col(0) + data.X.col(2) +
           oracles::random_vector(n, rng);
  return data;
}

}  // namespace

TEST_SUITE("double_selection") {

TEST_CASE("plugin variance by hand") {
  RealVector v(2), z(2);
  v << 1, 1;
  z << 1, 1;
  CHECK(plugin_variance(v, z) == 1.0);

  v << 1, 2;
  z << 2, 1;
  // En[v^2] = 2.5, En[(vz)^2] = 4 -> 4 / 6.25
  CHECK(std::abs(plugin_variance(v, z) - 0.64) <= 1e-15);

  CHECK_THROWS_AS(plugin_variance(RealVector::Zero(3), RealVector::Ones(3)),
                  estimation_error);
  CHECK_THROWS_AS(plugin_variance(RealVector::Ones(2), RealVector::Ones(3)),
                  argument_error);
  CHECK_THROWS_AS(plugin_variance(RealVector::Ones(1), RealVector::Ones(1)),
                  argument_error);
}

TEST_CASE("jackknife variance by hand and against the explicit-inverse oracle") {
  // Intercept-only fit, residuals (1, 0, 1), leverage 1/3 each:
  // sum (1/9) e_i^2 / (2/3)^2 = 0.5.
  RealMatrix W = RealMatrix::Ones(3, 1);
  RealVector e(3);
  e << 1, 0, 1;
  CHECK(std::abs(jackknife_variance(W, e, 0) - 0.5) <= 1e-14);

  std::mt19937_64 rng(2525);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = 30, k = 4;
    const RealMatrix D = oracles::random_matrix(n, k, rng);
    const RealVector r = oracles::random_vector(n, rng);
    for (Index c = 0; c < k; ++c) {
      const double lib = jackknife_variance(D, r, c);
      const double ref = oracles::hc3_variance(D, r, c);
      CHECK(std::abs(lib - ref) <= 1e-10 * std::max(1.0, ref));
    }
    // Doubling the residuals quadruples the variance.
    CHECK(std::abs(jackknife_variance(D, 2.0 * r, 0) -
                   4.0 * jackknife_variance(D, r, 0)) <=
          1e-10 * jackknife_variance(D, r, 0));
  }
}

TEST_CASE("jackknife pseudo-inverse path: duplicated column quarters the variance") {
  std::mt19937_64 rng(808);
  const RealVector w = oracles::random_vector(40, rng);
  const RealVector e = oracles::random_vector(40, rng);
  RealMatrix single(40, 1), twin(40, 2);
  single.col(0) = w;
  twin.col(0) = w;
  twin.col(1) = w;
  // The minimum-norm row of the pseudo-inverse halves, the hat matrix is
  // unchanged, so the sandwich entry comes out at a quarter.
  const double v1 = jackknife_variance(single, e, 0);
  const double v2 = jackknife_variance(twin, e, 0);
  CHECK(std::abs(v2 - 0.25 * v1) <= 1e-10 * v1);
}

TEST_CASE("jackknife matches the classical variance under homoscedasticity") {
  std::mt19937_64 rng(31);
  const Index n = 10000, k = 3;
  const RealMatrix W = oracles::random_matrix(n, k, rng);
  const RealVector e = oracles::random_vector(n, rng);
  const double sigma2 = e.squaredNorm() / n;
  const RealMatrix gram_inv = (W.transpose() * W).inverse();
  for (Index c = 0; c < k; ++c) {
    const double classical = sigma2 * gram_inv(c, c);
    const double hc3 = jackknife_variance(W, e, c);
    CHECK(std::abs(hc3 / classical - 1.0) <= 0.10);
  }
}

TEST_CASE("jackknife guards") {
  CHECK_THROWS_AS(jackknife_variance(RealMatrix::Identity(2, 2),
                                     RealVector::Ones(2), 0),
                  estimation_error);  // leverage exactly one
  CHECK_THROWS_AS(jackknife_variance(RealMatrix::Zero(3, 2),
                                     RealVector::Ones(3), 0),
                  estimation_error);  // rank zero
  CHECK_THROWS_AS(jackknife_variance(RealMatrix::Ones(3, 1),
                                     RealVector::Ones(2), 0),
                  argument_error);
  CHECK_THROWS_AS(jackknife_variance(RealMatrix::Ones(3, 1),
                                     RealVector::Ones(3), 1),
                  argument_error);
}

TEST_CASE("forcing every control reproduces plain least squares") {
  std::mt19937_64 rng(91);
  const Index n = 80, p = 6;
  const TestData data = confounded_data(n, p, rng);
  std::vector<Index> all(p);
  for (Index j = 0; j < p; ++j) all[static_cast<std::size_t>(j)] = j;

  const TreatmentEffectEstimate est =
      post_double_selection(data.y, data.d, data.X, all, PenaltyConfig{}, 0.95);

  RealMatrix W(n, p + 1);
  W.col(0) = data.d;
  W.rightCols(p) = data.X;
  const OlsFit direct = ols_fit(W, data.y);
  CHECK(std::abs(est.alpha_hat - direct.coefficients(0)) <= 1e-10);
  for (Index j = 0; j < p; ++j)
    CHECK(std::abs(est.beta_hat(j) - direct.coefficients(j + 1)) <= 1e-10);
  CHECK(est.selection.joined == all);
}

TEST_CASE("estimate equals the partialled-out slope on the joined controls") {
  std::mt19937_64 rng(747);
  const Index n = 120, p = 30;
  const TestData data = confounded_data(n, p, rng);

  const TreatmentEffectEstimate est = post_double_selection(
      data.y, data.d, data.X, {}, PenaltyConfig{}, 0.95);

  // Residualize both y and d on the joined controls, then take the simple
  // regression slope of one residual on the other.
  const OlsFit dy = post_lasso_refit(data.X, data.y, est.selection.joined);
  const OlsFit dd = post_lasso_refit(data.X, data.d, est.selection.joined);
  const double slope =
      dd.residuals.dot(dy.residuals) / dd.residuals.squaredNorm();
  CHECK(std::abs(est.alpha_hat - slope) <= 1e-8);

  // The stored treatment residual is d minus its projection on the controls.
  CHECK((est.v_hat - dd.residuals).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("reported pieces are mutually consistent") {
  std::mt19937_64 rng(555);
  const Index n = 100, p = 25;
  const TestData data = confounded_data(n, p, rng);
  const double level = 0.90;

  const TreatmentEffectEstimate est =
      post_double_selection(data.y, data.d, data.X, {0}, PenaltyConfig{}, level);

  CHECK(est.n == n);
  CHECK(est.p == p);
  CHECK(est.level == level);

  // Joined support: sorted, unique, contains the forced set, and the
  // coefficient vector vanishes off it.
  const auto& joined = est.selection.joined;
  CHECK(std::is_sorted(joined.begin(), joined.end()));
  CHECK(std::adjacent_find(joined.begin(), joined.end()) == joined.end());
  CHECK(std::binary_search(joined.begin(), joined.end(), Index{0}));
  for (Index j = 0; j < p; ++j)
    if (!std::binary_search(joined.begin(), joined.end(), j))
      CHECK(est.beta_hat(j) == 0.0);

  // Residual inflation: zeta = (y - alpha d - X beta) * sqrt(n/(n-s-1)).
  const auto s = static_cast<double>(joined.size());
  const RealVector raw =
      data.y - est.alpha_hat * data.d - data.X * est.beta_hat;
  const double inflate = std::sqrt(n / (n - s - 1.0));
  CHECK((est.zeta_hat - inflate * raw).cwiseAbs().maxCoeff() <= 1e-10);

  // Variance plumbing.
  CHECK(std::abs(est.sigma_n * est.sigma_n -
                 plugin_variance(est.v_hat, est.zeta_hat)) <=
        1e-12 * est.sigma_n * est.sigma_n);
  CHECK(std::abs(est.se_plugin - est.sigma_n / std::sqrt(n)) <= 1e-15);

  RealMatrix W(n, static_cast<Index>(joined.size()) + 1);
  W.col(0) = data.d;
  for (std::size_t k = 0; k < joined.size(); ++k)
    W.col(static_cast<Index>(k) + 1) = data.X.col(joined[k]);
  const double jk = jackknife_variance(W, raw, 0);
  CHECK(std::abs(est.se_jackknife - std::sqrt(jk)) <= 1e-12);

  // Intervals: plugin from sigma_n / sqrt(n), jackknife from its own SE.
  const Interval plug =
      confidence_interval(est.alpha_hat, est.sigma_n, n, level);
  CHECK(est.ci_plugin.lower == plug.lower);
  CHECK(est.ci_plugin.upper == plug.upper);
  const double q = oracles::normal_quantile(1.0 - (1.0 - level) / 2.0);
  CHECK(std::abs(est.ci_jackknife.lower -
                 (est.alpha_hat - q * est.se_jackknife)) <= 1e-9);
  CHECK(std::abs(est.ci_jackknife.upper -
                 (est.alpha_hat + q * est.se_jackknife)) <= 1e-9);
}

TEST_CASE("selection on a null target is empty and stays modest on noise") {
  std::mt19937_64 rng(17);
  const RealMatrix X = oracles::random_matrix(60, 40, rng);
  CHECK(select_controls(X, RealVector::Zero(60), PenaltyConfig{}).empty());

  for (int rep = 0; rep < 10; ++rep) {
    const RealMatrix Z = oracles::random_matrix(100, 200, rng);
    const RealVector t = Z.col(0) + oracles::random_vector(100, rng);
    CHECK(select_controls(Z, t, PenaltyConfig{}).size() <= 20);
  }
}

TEST_CASE("duplicating a strong control keeps the fitted subspace") {
  std::mt19937_64 rng(40);
  const Index n = 80, p = 10;
  const RealMatrix X = oracles::random_matrix(n, p, rng);
  const RealVector t = 3.0 * X.col(0) + 2.0 * X.col(3) +
                       0.3 * oracles::random_vector(n, rng);

  RealMatrix X2(n, p + 1);
  X2.leftCols(p) = X;
  X2.col(p) = X.col(0);

  const auto s1 = select_controls(X, t, PenaltyConfig{});
  const auto s2 = select_controls(X2, t, PenaltyConfig{});
  const RealVector f1 = post_lasso_refit(X, t, s1).fitted;
  const RealVector f2 = post_lasso_refit(X2, t, s2).fitted;
  CHECK((f1 - f2).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("single-selection comparator shares the refit machinery") {
  std::mt19937_64 rng(23);
  const Index n = 90, p = 15;
  const TestData data = confounded_data(n, p, rng);

  const TreatmentEffectEstimate est =
      post_single_selection(data.y, data.d, data.X, PenaltyConfig{}, 0.95);
  CHECK(std::isfinite(est.alpha_hat));
  CHECK(est.selection.treatment.empty());
  CHECK(est.selection.amelioration.empty());
  CHECK(est.selection.joined == est.selection.outcome);

  // An exact copy of d among the controls is never selected: the unpenalized
  // treatment column absorbs that direction first.
  RealMatrix X2 = data.X;
  X2.col(4) = data.d;
  const TreatmentEffectEstimate dup =
      post_single_selection(data.y, data.d, X2, PenaltyConfig{}, 0.95);
  CHECK(std::isfinite(dup.alpha_hat));
  CHECK(!std::binary_search(dup.selection.joined.begin(),
                            dup.selection.joined.end(), Index{4}));
  CHECK(!dup.rank_deficient);
}

TEST_CASE("rank-deficient joint design is flagged and still finite") {
  std::mt19937_64 rng(62);
  const Index n = 70, p = 8;
  TestData data = confounded_data(n, p, rng);
  data.X.col(5) = data.X.col(4);  // duplicated control pair

  const TreatmentEffectEstimate est = post_double_selection(
      data.y, data.d, data.X, {4, 5}, PenaltyConfig{}, 0.95);
  CHECK(est.rank_deficient);
  CHECK(std::isfinite(est.alpha_hat));
  CHECK(std::isfinite(est.se_plugin));
  CHECK(std::isfinite(est.se_jackknife));
  CHECK(est.se_jackknife > 0.0);
}

TEST_CASE("degenerate configurations raise estimation errors") {
  std::mt19937_64 rng(3003);
  const Index n = 10, p = 10;
  const RealMatrix X = oracles::random_matrix(n, p, rng);
  const RealVector d = oracles::random_vector(n, rng);
  const RealVector y = oracles::random_vector(n, rng);

  std::vector<Index> all(p);
  for (Index j = 0; j < p; ++j) all[static_cast<std::size_t>(j)] = j;
  CHECK_THROWS_AS(post_double_selection(y, d, X, all, PenaltyConfig{}, 0.95),
                  estimation_error);  // no residual degrees of freedom

  TestData big = confounded_data(60, 8, rng);
  big.X.col(2) = big.d;  // forced control explains d exactly
  CHECK_THROWS_AS(
      post_double_selection(big.y, big.d, big.X, {2}, PenaltyConfig{}, 0.95),
      estimation_error);
}

TEST_CASE("argument validation") {
  std::mt19937_64 rng(5);
  const TestData data = confounded_data(30, 4, rng);
  CHECK_THROWS_AS(post_double_selection(data.y, data.d, data.X, {4},
                                        PenaltyConfig{}, 0.95),
                  argument_error);
  CHECK_THROWS_AS(post_double_selection(data.y, data.d, data.X, {},
                                        PenaltyConfig{}, 1.0),
                  argument_error);
  CHECK_THROWS_AS(post_double_selection(RealVector::Ones(29), data.d, data.X,
                                        {}, PenaltyConfig{}, 0.95),
                  argument_error);
  CHECK_THROWS_AS(select_controls(data.X, RealVector::Ones(29),
                                  PenaltyConfig{}),
                  argument_error);
}

TEST_CASE("interval construction") {
  const double q = oracles::normal_quantile(0.975);

  // se on the root-n scale: the interval uses se / sqrt(n).
  const Interval iv = confidence_interval(1.0, 2.0, 4, 0.95);
  CHECK(std::abs(iv.lower - (1.0 - q)) <= 1e-9);
  CHECK(std::abs(iv.upper - (1.0 + q)) <= 1e-9);

  const Interval wide = confidence_interval(0.0, 1.0, 1, 0.99);
  const Interval narrow = confidence_interval(0.0, 1.0, 1, 0.95);
  CHECK(wide.upper > narrow.upper);
  CHECK(wide.lower < narrow.lower);

  const Interval point = confidence_interval(3.0, 0.0, 10, 0.95);
  CHECK(point.lower == 3.0);
  CHECK(point.upper == 3.0);

  CHECK_THROWS_AS(confidence_interval(0.0, -1.0, 10, 0.95), argument_error);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 0, 0.95), argument_error);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 10, 0.0), argument_error);
}

TEST_CASE("plug-in t-statistic is calibrated on dense simulated confounding") {
  // 2000 replications of the heavy-grid scenario: a correctly sized plug-in
  // test should reject a true null close to its nominal 5% level.
  DesignSpec spec;
  spec.design = 1;
  spec.r2_y = 0.5;
  spec.r2_d = 0.5;
  spec.seed = 324;
  const double z = oracles::normal_quantile(0.975);

  std::size_t rejected = 0;
  for (std::size_t rep = 0; rep < 2000; ++rep) {
    RngStream stream(spec.seed, rep);
    const ReplicationDraw draw = generate_replication(spec, stream);
    const Index p = draw.X.cols();
    RealMatrix augmented(draw.X.rows(), p + 1);
    augmented.leftCols(p) = draw.X;
    augmented.col(p).setOnes();
    PenaltyConfig config;
    config.initial_set = {p};
    const TreatmentEffectEstimate est = post_double_selection(
        draw.y, draw.d, augmented, {p}, config, 0.95);
    rejected +=
        std::abs(est.alpha_hat - spec.alpha0) > z * est.se_plugin ? 1 : 0;
  }
  const double rate = static_cast<double>(rejected) / 2000.0;
  CHECK(rate >= 0.03);
  CHECK(rate <= 0.08);
}

TEST_CASE("ridge fitted values: zero penalty is least squares, huge penalty is inert") {
  std::mt19937_64 rng(606);
  const Index n = 50, p = 5;
  const RealMatrix X = oracles::random_matrix(n, p, rng);
  const RealVector d = X.col(0) + 0.5 * oracles::random_vector(n, rng);

  RngStream zero_stream(7, 0);
  const RidgeCvFit at_zero = ridge_cv_fit(X, d, 5, {0.0}, zero_stream);
  CHECK(at_zero.kappa == 0.0);
  CHECK((at_zero.fitted - ols_fit(X, d).fitted).cwiseAbs().maxCoeff() <= 1e-8);

  // With an enormous penalty the appended column is numerically zero and the
  // augmented estimator collapses onto the plain one.
  std::mt19937_64 rng2(607);
  const TestData data = confounded_data(150, 12, rng2);
  const TreatmentEffectEstimate plain = post_double_selection(
      data.y, data.d, data.X, {}, PenaltyConfig{}, 0.95);
  RidgeCvSpec spec;
  spec.folds = 5;
  spec.grid = {1e12};
  RngStream stream(11, 3);
  const TreatmentEffectEstimate ridge = post_double_selection_ridge(
      data.y, data.d, data.X, {}, PenaltyConfig{}, 0.95, spec, stream);
  CHECK(ridge.p == data.X.cols() + 1);
  CHECK(std::abs(ridge.alpha_hat - plain.alpha_hat) <= 1e-8);
  CHECK(std::abs(ridge.se_jackknife - plain.se_jackknife) <= 1e-8);
}

TEST_CASE("ridge with an intercept column is shift invariant") {
  std::mt19937_64 rng(1212);
  const Index n = 60, p = 6;
  RealMatrix X(n, p);
  X.col(0).setOnes();
  X.rightCols(p - 1) = oracles::random_matrix(n, p - 1, rng);
  const RealVector d = X.col(1) + oracles::random_vector(n, rng);

  RngStream s1(42, 9), s2(42, 9);
  const RidgeCvFit base = ridge_cv_fit(X, d, 6, {1.0, 10.0}, s1);
  const RidgeCvFit shifted =
      ridge_cv_fit(X, (d.array() + 5.0).matrix(), 6, {1.0, 10.0}, s2);
  CHECK(shifted.kappa == base.kappa);
  CHECK((shifted.fitted - (base.fitted.array() + 5.0).matrix())
            .cwiseAbs()
            .maxCoeff() <= 1e-8);
}

TEST_CASE("cross-validation prefers interior penalties when signal is strong") {
  std::mt19937_64 rng(99);
  int interior = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const Index n = 120, p = 10;
    const RealMatrix X = oracles::random_matrix(n, p, rng);
    const RealVector d =
        2.0 * X.col(0) - X.col(1) + 0.5 * oracles::random_vector(n, rng);
    RngStream stream(1000 + rep, 0);
    const RidgeCvFit fit = ridge_cv_fit(X, d, 10, {}, stream);
    CHECK(fit.cv_errors.size() == default_ridge_grid(n, p).size());
    if (fit.kappa < default_ridge_grid(n, p).back()) ++interior;
  }
  CHECK(interior >= 9);
}

TEST_CASE("ridge validation and determinism") {
  std::mt19937_64 rng(2);
  const RealMatrix X = oracles::random_matrix(20, 3, rng);
  const RealVector d = oracles::random_vector(20, rng);
  RngStream stream(1, 0);
  CHECK_THROWS_AS(ridge_cv_fit(X, d, 1, {}, stream), argument_error);
  CHECK_THROWS_AS(ridge_cv_fit(X, d, 21, {}, stream), argument_error);
  CHECK_THROWS_AS(ridge_cv_fit(X, d, 5, {-1.0}, stream), argument_error);
  CHECK_THROWS_AS(ridge_cv_fit(X, RealVector::Ones(19), 5, {}, stream),
                  argument_error);

  std::mt19937_64 rng2(77);
  const TestData data = confounded_data(80, 10, rng2);
  RidgeCvSpec spec;
  spec.folds = 8;
  RngStream a(5, 2), b(5, 2);
  const TreatmentEffectEstimate r1 = post_double_selection_ridge(
      data.y, data.d, data.X, {}, PenaltyConfig{}, 0.95, spec, a);
  const TreatmentEffectEstimate r2 = post_double_selection_ridge(
      data.y, data.d, data.X, {}, PenaltyConfig{}, 0.95, spec, b);
  CHECK(r1.alpha_hat == r2.alpha_hat);
  CHECK(r1.se_jackknife == r2.se_jackknife);
  CHECK(r1.selection.joined == r2.selection.joined);
}

TEST_CASE("default grid adapts to the design shape") {
  const auto wide = default_ridge_grid(200, 10);
  CHECK(wide.front() == 1e-4);
  CHECK(wide.back() == 1e4);
  const auto guarded = default_ridge_grid(100, 200);
  CHECK(guarded.front() == 1e1);
  CHECK(guarded.back() == 1e4);
  CHECK(std::is_sorted(wide.begin(), wide.end()));
  CHECK(std::is_sorted(guarded.begin(), guarded.end()));
}

}  // TEST_SUITE
