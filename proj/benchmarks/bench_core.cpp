#include <random>

#include <benchmark/benchmark.h>

#include "spdreg/spdreg.hpp"

namespace {

using namespace spdreg;

SymMat random_sym(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  SymMat m(3);
  for (double& c : m.coeffs()) c = n(rng);
  return m;
}

TensorField noisy_staircase(int n) { return corrupt_field(make_staircase_phantom(n), {40.0, 1}); }

void BM_MatExp(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const SymMat s = random_sym(rng, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(mat_exp(s));
}
BENCHMARK(BM_MatExp);

void BM_DistLogEuclidean(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const SpdTensor a = mat_exp(random_sym(rng, 1.0)), b = mat_exp(random_sym(rng, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(dist_log_euclidean(a, b));
}
BENCHMARK(BM_DistLogEuclidean);

void BM_ProjectFull(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const SymMat m = random_sym(rng, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(project_full(m));
}
BENCHMARK(BM_ProjectFull);

void BM_Gradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  FunctionalParams fp;
  fp.p = 1.1;
  fp.n_rho = static_cast<int>(state.range(1));
  const TensorField data = noisy_staircase(n);
  const ObjectiveFunction f(data, Mask(n, n), fp, Objective::FLogEuclidean);
  const SymField x = f.coords(data);
  for (auto _ : state) benchmark::DoNotOptimize(f.gradient(x));
}
BENCHMARK(BM_Gradient)->Args({10, 1})->Args({10, 3})->Args({32, 3});

void BM_SolveStaircase(benchmark::State& state) {
  FunctionalParams fp;
  fp.p = 1.1;
  fp.alpha = 1.0;
  fp.n_rho = 3;
  SolverConfig cfg;
  cfg.direction = state.range(0) ? Direction::Newton : Direction::Gradient;
  const TensorField data = noisy_staircase(10);
  for (auto _ : state) benchmark::DoNotOptimize(solve(data, Mask(10, 10), fp, Objective::FLogEuclidean, cfg));
}
BENCHMARK(BM_SolveStaircase)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
