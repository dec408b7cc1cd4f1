#include <benchmark/benchmark.h>

#include <random>

#include "fanning/kernel.hpp"

namespace {

using fanning::Points;

Points random_points(int n, int d, unsigned seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Points p(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) p(i, k) = dist(rng);
  return p;
}

struct Problem {
  explicit Problem(int n)
      : c(random_points(n, 3, 1, 0.0, 10.0)), alpha(random_points(n, 3, 2, -1.0, 1.0)) {}
  Points c;
  Points alpha;
  fanning::KernelConfig cfg{1.0, 0.0};
};

void BM_KernelMatrixSerial(benchmark::State& state) {
  const Problem p(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fanning::serial::kernel_matrix(p.c, p.cfg));
}

void BM_KernelMatrixParallel(benchmark::State& state) {
  const Problem p(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fanning::kernel_matrix(p.c, p.cfg));
}

void BM_ApplyKernelSerial(benchmark::State& state) {
  const Problem p(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fanning::serial::apply_kernel(p.c, p.alpha, p.c, p.cfg));
}

void BM_ApplyKernelParallel(benchmark::State& state) {
  const Problem p(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fanning::apply_kernel(p.c, p.alpha, p.c, p.cfg));
}

void BM_EnergyGradientSerial(benchmark::State& state) {
  const Problem p(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fanning::serial::energy_gradient(p.c, p.alpha, p.cfg));
}

void BM_EnergyGradientParallel(benchmark::State& state) {
  const Problem p(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fanning::energy_gradient(p.c, p.alpha, p.cfg));
}

}  // namespace

BENCHMARK(BM_KernelMatrixSerial)->Arg(500)->Arg(3000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_KernelMatrixParallel)->Arg(500)->Arg(3000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ApplyKernelSerial)->Arg(500)->Arg(3000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ApplyKernelParallel)->Arg(500)->Arg(3000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EnergyGradientSerial)->Arg(500)->Arg(3000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EnergyGradientParallel)->Arg(500)->Arg(3000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
