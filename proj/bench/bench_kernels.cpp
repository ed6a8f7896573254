// Serial reference loops vs the OpenMP kernels on the shapes training hits.
#include <benchmark/benchmark.h>

#include "lscae/kernels.hpp"
#include "lscae/matrix.hpp"
#include "lscae/rng.hpp"

namespace {

using lscae::Matrix;

Matrix random(std::size_t r, std::size_t c, std::uint64_t seed) {
  lscae::RngStream rng(seed);
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

template <Matrix (*F)(const Matrix&)>
void sq_dist(benchmark::State& state) {
  const Matrix x = random(static_cast<std::size_t>(state.range(0)), 32, 1);
  for (auto _ : state) benchmark::DoNotOptimize(F(x));
}

template <Matrix (*F)(const Matrix&, const Matrix&)>
void product(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random(n, 128, 2);
  const Matrix b = random(128, 128, 3);
  for (auto _ : state) benchmark::DoNotOptimize(F(a, b));
}

template <Matrix (*F)(const Matrix&, const Matrix&)>
void product_abt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random(n, 128, 4);
  const Matrix b = random(128, 128, 5);
  for (auto _ : state) benchmark::DoNotOptimize(F(a, b));
}

template <Matrix (*F)(const Matrix&, double)>
void gaussian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix d2 = lscae::kernels::serial::pairwise_sq_dist(random(n, 8, 6));
  for (auto _ : state) benchmark::DoNotOptimize(F(d2, 1.5));
}

}  // namespace

BENCHMARK(sq_dist<lscae::kernels::serial::pairwise_sq_dist>)->Name("pairwise_sq_dist/serial")->Arg(256)->Arg(1024);
BENCHMARK(sq_dist<lscae::kernels::pairwise_sq_dist>)->Name("pairwise_sq_dist/parallel")->Arg(256)->Arg(1024);
BENCHMARK(product<lscae::kernels::serial::matmul>)->Name("matmul/serial")->Arg(256)->Arg(1024);
BENCHMARK(product<lscae::kernels::matmul>)->Name("matmul/parallel")->Arg(256)->Arg(1024);
BENCHMARK(product_abt<lscae::kernels::serial::matmul_abt>)->Name("matmul_abt/serial")->Arg(256)->Arg(1024);
BENCHMARK(product_abt<lscae::kernels::matmul_abt>)->Name("matmul_abt/parallel")->Arg(256)->Arg(1024);
BENCHMARK(gaussian<lscae::kernels::serial::gaussian_from_sq_dist>)->Name("gaussian/serial")->Arg(256)->Arg(1024);
BENCHMARK(gaussian<lscae::kernels::gaussian_from_sq_dist>)->Name("gaussian/parallel")->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
