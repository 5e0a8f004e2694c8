#include <benchmark/benchmark.h>

#include <random>

#include "znn/catalog.hpp"
#include "znn/engine.hpp"
#include "znn/experiment.hpp"
#include "znn/tensor.hpp"

namespace {

znn::Matrix random_matrix(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  znn::Matrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      m(i, j) = znn::Complex(normal(rng), normal(rng));
  return m;
}

// Full solver steps on the matrix-square-root class: one kronecker-sum
// assembly plus one minimum-norm solve per step.
void BM_SolverStep(benchmark::State& state) {
  const double tau = 0.02;
  const znn::DataSourceConfig source{znn::DerivativeSource::kAnalytic, 0, 2,
                                     tau, 0.0};
  const znn::ProblemInstance problem = znn::make_problem(
      "sqrt", znn::make_flow(znn::parse_flow_spec("spd2-sqrt")), source);
  znn::RunConfig config;
  config.grid = znn::SamplingGrid{0.0, 1e7, tau};
  config.eta = 3.0;
  config.start = znn::StartPolicy::kOracle;
  znn::Solver solver(znn::catalog_require("4_5"), problem, config);
  for (auto _ : state) {
    if (!solver.advance()) {
      state.SkipWithError("grid exhausted");
      break;
    }
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SolverStep);

void BM_MinNormSolve(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const znn::Matrix m = random_matrix(n, 17);
  const znn::Matrix rhs = random_matrix(n, 23).col(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(znn::min_norm_solve(m, rhs));
  }
}
BENCHMARK(BM_MinNormSolve)->Arg(4)->Arg(9)->Arg(16)->Arg(25);

void BM_Kron(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const znn::Matrix a = random_matrix(n, 5);
  const znn::Matrix b = random_matrix(n, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(znn::kron(a, b));
  }
}
BENCHMARK(BM_Kron)->Arg(4)->Arg(8);

void BM_AnalyzeRoots(benchmark::State& state) {
  const znn::DifferenceFormula formula = znn::catalog_require("4_5");
  for (auto _ : state) {
    benchmark::DoNotOptimize(znn::analyze_roots(formula));
  }
}
BENCHMARK(BM_AnalyzeRoots);

}  // namespace

BENCHMARK_MAIN();
