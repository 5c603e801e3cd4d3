#include <benchmark/benchmark.h>

#include "regionfac/factorizer.hpp"
#include "regionfac/generators.hpp"
#include "regionfac/kernels.hpp"

using namespace regionfac;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  return Matrix(rows, cols, normal_vector(rng, rows * cols));
}

void BM_Gram(benchmark::State& state) {
  const Matrix m = random_matrix(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::gram(m));
}

void BM_GramReference(benchmark::State& state) {
  const Matrix m = random_matrix(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::gram(m));
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 2);
  const Matrix b = random_matrix(n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::matmul(a, b));
}

void BM_MatmulReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 2);
  const Matrix b = random_matrix(n, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::reference::matmul(a, b));
}

// K latent dims, background rank K/4.
void factorize_bench(benchmark::State& state, Method method) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Matrix fg = random_matrix(k, k, 4);
  const Matrix bg = kernels::matmul(random_matrix(3 * k, k / 4, 5), random_matrix(k / 4, k, 6));
  for (auto _ : state) {
    if (method == Method::Fast) {
      benchmark::DoNotOptimize(factorize_fast(fg, bg));
    } else {
      benchmark::DoNotOptimize(factorize_standard(fg, bg));
    }
  }
}

void BM_FactorizeFast(benchmark::State& state) { factorize_bench(state, Method::Fast); }
void BM_FactorizeStandard(benchmark::State& state) { factorize_bench(state, Method::Standard); }

}  // namespace

BENCHMARK(BM_Gram)->Args({4096, 256})->Args({16384, 512})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramReference)->Args({4096, 256})->Args({16384, 512})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Matmul)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatmulReference)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FactorizeFast)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FactorizeStandard)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
