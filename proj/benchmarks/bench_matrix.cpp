#include <benchmark/benchmark.h>

#include "weakshot/matrix.hpp"
#include "weakshot/rng.hpp"

namespace {

using weakshot::Matrix;
using weakshot::Rng;

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.normal();
  return m;
}

void BM_MatmulSquare(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix a = random_matrix(n, n, rng);
  const Matrix b = random_matrix(n, n, rng);
  for (auto _ : state) {
    Matrix c = weakshot::matmul(a, b);
    benchmark::DoNotOptimize(c.data.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * n * n * n);
}
BENCHMARK(BM_MatmulSquare)->Arg(32)->Arg(64)->Arg(128);

// The hot shape of relation training: M^2 enumerated pairs through 2E -> R.
void BM_MatmulPairBlock(benchmark::State& state) {
  const std::size_t m2 = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const Matrix pairs = random_matrix(m2, 64, rng);
  const Matrix weight_t = random_matrix(64, 64, rng);
  for (auto _ : state) {
    Matrix c = weakshot::matmul(pairs, weight_t);
    benchmark::DoNotOptimize(c.data.data());
  }
}
BENCHMARK(BM_MatmulPairBlock)->Arg(2500)->Arg(10000);

void BM_MatmulTransposedLhs(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const Matrix a = random_matrix(n, 96, rng);
  const Matrix b = random_matrix(n, 32, rng);
  for (auto _ : state) {
    Matrix c = weakshot::matmul_tn(a, b);
    benchmark::DoNotOptimize(c.data.data());
  }
}
BENCHMARK(BM_MatmulTransposedLhs)->Arg(128)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
