#include "pdsel/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "pdsel/diagnostics.hpp"
#include "pdsel/double_selection.hpp"
#include "pdsel/errors.hpp"

namespace pdsel {

namespace {

void validate_spec(const DesignSpec& spec) {
  if (spec.design < 1 || spec.design > 3)
    throw argument_error("design must be 1, 2, or 3");
  if (spec.n < 2) throw argument_error("n must be at least 2");
  if (spec.p < 1) throw argument_error("p must be at least 1");
  if (!(spec.rho > -1.0 && spec.rho < 1.0))
    throw argument_error("rho must lie in (-1, 1)");
  if (!(spec.r2_y >= 0.0 && spec.r2_y < 1.0) ||
      !(spec.r2_d >= 0.0 && spec.r2_d < 1.0))
    throw argument_error("R^2 targets must lie in [0, 1)");
  if (!std::isfinite(spec.alpha0))
    throw argument_error("alpha0 must be finite");
}

RealVector decay_vector(Index p) {
  RealVector b(p);
  for (Index j = 0; j < p; ++j) {
    const double rank = static_cast<double>(j + 1);
    b(j) = 1.0 / (rank * rank);
  }
  return b;
}

// b' Sigma b for the rho-Toeplitz correlation without forming Sigma.
double toeplitz_quadratic(const RealVector& b, double rho) {
  const Index p = b.size();
  double total = b.squaredNorm();
  double power = rho;
  for (Index lag = 1; lag < p; ++lag) {
    double cross = 0.0;
    for (Index j = 0; j + lag < p; ++j) cross += b(j) * b(j + lag);
    total += 2.0 * power * cross;
    power *= rho;
  }
  return total;
}

const double kCriticalValue5 = []() { return normal_quantile(0.975); }();

SimpleEstimate simple_regression(const RealVector& response,
                                 const RealVector& regressor) {
  RealMatrix W(regressor.size(), 1);
  W.col(0) = regressor;
  const OlsFit fit = ols_fit(W, response);
  SimpleEstimate est;
  est.alpha_hat = fit.coefficients(0);
  est.se = std::sqrt(jackknife_variance(W, fit.residuals, 0));
  return est;
}

struct rep_outcome {
  double alpha = 0.0;
  double se = 0.0;  // jackknife; drives both the rejection test and the
                    // studentized samples, the convention used throughout
  bool ok = false;
};

rep_outcome apply_estimator(Estimator which, const ReplicationDraw& draw,
                            const DesignSpec& spec, std::size_t rep) {
  try {
    switch (which) {
      case Estimator::Oracle: {
        const SimpleEstimate e = oracle_estimate(draw);
        return {e.alpha_hat, e.se, true};
      }
      case Estimator::DsOracle: {
        const SimpleEstimate e = ds_oracle_estimate(draw);
        return {e.alpha_hat, e.se, true};
      }
      default:
        break;
    }
    const Index p = draw.X.cols();
    RealMatrix augmented(draw.X.rows(), p + 1);
    augmented.leftCols(p) = draw.X;
    augmented.col(p).setOnes();
    PenaltyConfig config;
    config.initial_set = {p};
    const std::vector<Index> amelioration = {p};

    TreatmentEffectEstimate est;
    if (which == Estimator::PostLasso) {
      est = post_single_selection(draw.y, draw.d, augmented, config, 0.95);
    } else if (which == Estimator::DoubleSelection) {
      est = post_double_selection(draw.y, draw.d, augmented, amelioration,
                                  config, 0.95);
    } else {
      RngStream ridge_stream(spec.seed,
                             (std::uint64_t{1} << 32) + static_cast<std::uint64_t>(rep));
      est = post_double_selection_ridge(draw.y, draw.d, augmented, amelioration,
                                        config, 0.95, RidgeCvSpec{},
                                        ridge_stream);
    }
    return {est.alpha_hat, est.se_jackknife, true};
  } catch (const estimation_error&) {
    return {};
  }
}

// Per-replication outcomes indexed [estimator][replication]; threads split the
// replication range into contiguous chunks, and the layout makes the reduction
// order independent of the thread count.
std::vector<std::vector<rep_outcome>> run_point(
    const DesignSpec& spec, std::size_t reps,
    const std::vector<Estimator>& estimators, std::size_t threads) {
  validate_spec(spec);
  if (reps < 1) throw argument_error("need at least one replication");
  if (estimators.empty()) throw argument_error("no estimators requested");

  std::vector<std::vector<rep_outcome>> results(
      estimators.size(), std::vector<rep_outcome>(reps));

  const std::size_t workers = std::max<std::size_t>(
      1, std::min(threads == 0 ? 1 : threads, reps));
  const std::size_t chunk = (reps + workers - 1) / workers;

  std::vector<std::exception_ptr> failures(workers);
  auto work = [&](std::size_t w) {
    try {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(reps, lo + chunk);
      for (std::size_t rep = lo; rep < hi; ++rep) {
        RngStream stream(spec.seed, static_cast<std::uint64_t>(rep));
        const ReplicationDraw draw = generate_replication(spec, stream);
        for (std::size_t e = 0; e < estimators.size(); ++e)
          results[e][rep] = apply_estimator(estimators[e], draw, spec, rep);
      }
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);
  return results;
}

EstimatorSummary summarize(Estimator which,
                           const std::vector<rep_outcome>& outcomes,
                           double alpha0) {
  EstimatorSummary s;
  s.estimator = estimator_name(which);
  double sum = 0.0;
  for (const rep_outcome& o : outcomes) {
    if (!o.ok) {
      ++s.exclusions;
      continue;
    }
    ++s.successes;
    sum += o.alpha;
  }
  if (s.successes == 0) return s;
  const double n = static_cast<double>(s.successes);
  const double mean = sum / n;
  double ss_mean = 0.0, ss_true = 0.0;
  std::size_t rejections = 0;
  for (const rep_outcome& o : outcomes) {
    if (!o.ok) continue;
    ss_mean += (o.alpha - mean) * (o.alpha - mean);
    ss_true += (o.alpha - alpha0) * (o.alpha - alpha0);
    if (std::abs(o.alpha - alpha0) > kCriticalValue5 * o.se) ++rejections;
  }
  s.bias = mean - alpha0;
  s.std_dev = std::sqrt(ss_mean / n);
  s.rmse = std::sqrt(ss_true / n);
  s.rejection_rate = static_cast<double>(rejections) / n;
  return s;
}

}  // namespace

std::string estimator_name(Estimator estimator) {
  switch (estimator) {
    case Estimator::Oracle: return "oracle";
    case Estimator::DsOracle: return "ds-oracle";
    case Estimator::PostLasso: return "post-lasso";
    case Estimator::DoubleSelection: return "double-selection";
    case Estimator::DoubleSelectionRidge: return "double-selection-ridge";
  }
  throw argument_error("unknown estimator");
}

Estimator estimator_from_name(const std::string& name) {
  if (name == "oracle") return Estimator::Oracle;
  if (name == "ds-oracle") return Estimator::DsOracle;
  if (name == "post-lasso") return Estimator::PostLasso;
  if (name == "double-selection") return Estimator::DoubleSelection;
  if (name == "double-selection-ridge") return Estimator::DoubleSelectionRidge;
  throw argument_error("unknown estimator '" + name +
                       "'; valid: oracle, ds-oracle, post-lasso, "
                       "double-selection, double-selection-ridge");
}

std::vector<Estimator> all_estimators() {
  return {Estimator::Oracle, Estimator::DsOracle, Estimator::PostLasso,
          Estimator::DoubleSelection, Estimator::DoubleSelectionRidge};
}

DesignConstants design_constants(const DesignSpec& spec) {
  validate_spec(spec);
  RealVector b = decay_vector(spec.p);
  if (spec.design == 3) {
    // The deterministic head carries the whole planned signal.
    for (Index j = 5; j < spec.p; ++j) b(j) = 0.0;
  }
  const double signal = toeplitz_quadratic(b, spec.rho);
  if (!(signal > 0.0))
    throw argument_error("design signal is degenerate");

  DesignConstants c;
  c.c_d = std::sqrt(spec.r2_d / ((1.0 - spec.r2_d) * signal));
  const double reduced =
      spec.r2_y * (spec.alpha0 * spec.alpha0 + 1.0) / ((1.0 - spec.r2_y) * signal);
  c.c_y = std::sqrt(reduced) - spec.alpha0 * c.c_d;
  return c;
}

ReplicationDraw generate_replication(const DesignSpec& spec, RngStream& stream) {
  validate_spec(spec);
  const DesignConstants constants = design_constants(spec);
  const Index n = spec.n;
  const Index p = spec.p;
  const RealVector beta0 = decay_vector(p);

  ReplicationDraw draw;
  draw.theta_g = constants.c_y * beta0;
  draw.theta_m = constants.c_d * beta0;
  if (spec.design == 3) {
    const double sd = std::sqrt(1.0 / static_cast<double>(p));
    Index limit = p;
    if (spec.restrict_random_tail_to_100) limit = std::min<Index>(limit, 100);
    for (Index j = 5; j < p; ++j) {
      if (j < limit) {
        draw.theta_g(j) = sd * stream.normal();
        draw.theta_m(j) = sd * stream.normal();
      } else {
        draw.theta_g(j) = 0.0;
        draw.theta_m(j) = 0.0;
      }
    }
  }

  const RealMatrix factor = toeplitz_correlation_factor(p, spec.rho);
  RealMatrix Z(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) Z(i, j) = stream.normal();
  draw.X = Z * factor.transpose();

  RealVector v(n), zeta(n);
  for (Index i = 0; i < n; ++i) v(i) = stream.normal();
  for (Index i = 0; i < n; ++i) zeta(i) = stream.normal();

  const auto heteroscedastic_scale = [n](const RealVector& base) {
    const double norm = std::sqrt(base.squaredNorm() / n);
    if (!(norm > 0.0))
      throw estimation_error("degenerate heteroscedasticity normalizer");
    return base.cwiseAbs() / norm;
  };

  if (spec.design == 2) {
    const RealVector xb = draw.X * beta0;
    const RealVector sigma_d =
        heteroscedastic_scale(RealVector::Ones(n) + xb);
    draw.d = draw.X * draw.theta_m + sigma_d.cwiseProduct(v);
    const RealVector sigma_y = heteroscedastic_scale(
        RealVector::Ones(n) + spec.alpha0 * draw.d + xb);
    draw.y = spec.alpha0 * draw.d + draw.X * draw.theta_g +
             sigma_y.cwiseProduct(zeta);
  } else {
    draw.d = draw.X * draw.theta_m + v;
    draw.y = spec.alpha0 * draw.d + draw.X * draw.theta_g + zeta;
  }
  return draw;
}

SimpleEstimate oracle_estimate(const ReplicationDraw& draw) {
  return simple_regression(draw.y - draw.X * draw.theta_g, draw.d);
}

SimpleEstimate ds_oracle_estimate(const ReplicationDraw& draw) {
  return simple_regression(draw.y - draw.X * draw.theta_g,
                           draw.d - draw.X * draw.theta_m);
}

std::vector<SimulationReport> run_grid(
    const DesignSpec& base, const std::vector<std::pair<double, double>>& grid,
    const GridOptions& options) {
  if (grid.empty()) throw argument_error("empty R^2 grid");
  std::vector<SimulationReport> reports;
  reports.reserve(grid.size());
  for (const auto& [r2_y, r2_d] : grid) {
    DesignSpec spec = base;
    spec.r2_y = r2_y;
    spec.r2_d = r2_d;
    const auto outcomes = run_point(spec, options.replications,
                                    options.estimators, options.threads);
    SimulationReport report;
    report.design = spec.design;
    report.r2_y = r2_y;
    report.r2_d = r2_d;
    report.replications = options.replications;
    report.seed = spec.seed;
    for (std::size_t e = 0; e < options.estimators.size(); ++e)
      report.estimators.push_back(
          summarize(options.estimators[e], outcomes[e], spec.alpha0));
    reports.push_back(std::move(report));
  }
  return reports;
}

StudentizedResult studentized_samples(const DesignSpec& spec, std::size_t reps,
                                      Estimator estimator,
                                      std::size_t threads) {
  if (reps < 100) throw argument_error("need at least 100 replications");
  const auto outcomes = run_point(spec, reps, {estimator}, threads);
  StudentizedResult result;
  result.samples.reserve(reps);
  for (const rep_outcome& o : outcomes[0]) {
    if (!o.ok) {
      ++result.exclusions;
      continue;
    }
    result.samples.push_back((o.alpha - spec.alpha0) / o.se);
  }
  if (result.samples.size() >= 2)
    result.ks = ks_distance_to_normal(result.samples);
  return result;
}

}  // namespace pdsel
