// Microbenchmarks for the hot paths: the coordinate-descent solvers, the
// loading iteration, and a full estimation pass on simulated data.

#include <memory>

#include <benchmark/benchmark.h>

#include <pdsel/double_selection.hpp>
#include <pdsel/lasso.hpp>
#include <pdsel/penalty.hpp>
#include <pdsel/rng.hpp>
#include <pdsel/simulation.hpp>

namespace {

using namespace pdsel;

ReplicationDraw make_draw(Index n, Index p) {
  DesignSpec spec;
  spec.design = 1;
  spec.n = n;
  spec.p = p;
  spec.r2_y = 0.5;
  spec.r2_d = 0.5;
  spec.seed = 1;
  RngStream stream(spec.seed, 0);
  return generate_replication(spec, stream);
}

LassoProblem make_problem(const ReplicationDraw& draw, ObjectiveKind kind) {
  LassoProblem problem;
  problem.X = draw.X;
  problem.y = draw.y;
  problem.kind = kind;
  const Index n = draw.X.rows();
  const Index p = draw.X.cols();
  problem.lambda = kind == ObjectiveKind::Lasso
                       ? lasso_lambda(n, p, 1.1, 0.05)
                       : sqrt_lasso_lambda(n, p, 1.1, 0.05);
  problem.loadings = floored_loadings(initial_loadings(draw.X, draw.y, {}),
                                      draw.X);
  return problem;
}

void bm_lasso_solve(benchmark::State& state) {
  const auto draw = make_draw(100, state.range(0));
  const auto problem = make_problem(draw, ObjectiveKind::Lasso);
  for (auto _ : state) benchmark::DoNotOptimize(solve_lasso(problem));
}
BENCHMARK(bm_lasso_solve)->Arg(100)->Arg(200)->Arg(500);

void bm_sqrt_lasso_solve(benchmark::State& state) {
  const auto draw = make_draw(100, state.range(0));
  const auto problem = make_problem(draw, ObjectiveKind::SqrtLasso);
  for (auto _ : state) benchmark::DoNotOptimize(solve_sqrt_lasso(problem));
}
BENCHMARK(bm_sqrt_lasso_solve)->Arg(100)->Arg(200)->Arg(500);

void bm_loading_iteration(benchmark::State& state) {
  const auto draw = make_draw(100, 200);
  PenaltyConfig config;
  const double lambda = penalty_level(100, 200, config);
  auto gram = std::make_shared<const RealMatrix>(
      (draw.X.transpose() * draw.X) / 100.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        iterate_loadings_lasso(draw.X, draw.y, lambda, config, {}, gram));
}
BENCHMARK(bm_loading_iteration);

void bm_post_double_selection(benchmark::State& state) {
  const auto draw = make_draw(100, 200);
  const Index p = draw.X.cols();
  RealMatrix augmented(draw.X.rows(), p + 1);
  augmented.leftCols(p) = draw.X;
  augmented.col(p).setOnes();
  PenaltyConfig config;
  config.initial_set = {p};
  for (auto _ : state)
    benchmark::DoNotOptimize(post_double_selection(
        draw.y, draw.d, augmented, {p}, config, 0.95));
}
BENCHMARK(bm_post_double_selection);

}  // namespace

BENCHMARK_MAIN();
