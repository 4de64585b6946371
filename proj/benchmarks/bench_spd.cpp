#include <benchmark/benchmark.h>

#include "sgmmq/rng.hpp"
#include "sgmmq/spd.hpp"

namespace {

using namespace sgmmq;

// Well-conditioned SPD matrix with off-diagonal mass, A = B B^T + n I.
SpdMatrix random_spd(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = rng.uniform(-1.0, 1.0);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = (i == j) ? static_cast<double>(n) : 0.0;
      for (std::size_t k = 0; k < n; ++k) s += b(i, k) * b(j, k);
      a(i, j) = s;
    }
  return SpdMatrix(a);
}

Vector random_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  return v;
}

void BM_sym_eig(benchmark::State& state) {
  const SpdMatrix c = random_spd(state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(sym_eig(c.sym()));
}
BENCHMARK(BM_sym_eig)->Arg(4)->Arg(6);

void BM_cholesky(benchmark::State& state) {
  const SpdMatrix c = random_spd(state.range(0), 2);
  const SymMatrix s = c.sym();
  for (auto _ : state) benchmark::DoNotOptimize(SpdMatrix(s));
}
BENCHMARK(BM_cholesky)->Arg(4)->Arg(6);

void BM_mat_exp(benchmark::State& state) {
  const SpdMatrix c = random_spd(state.range(0), 3);
  const SymMatrix x = mat_log(c);
  for (auto _ : state) benchmark::DoNotOptimize(mat_exp(x));
}
BENCHMARK(BM_mat_exp)->Arg(4)->Arg(6);

void BM_mat_log(benchmark::State& state) {
  const SpdMatrix c = random_spd(state.range(0), 4);
  for (auto _ : state) benchmark::DoNotOptimize(mat_log(c));
}
BENCHMARK(BM_mat_log)->Arg(4)->Arg(6);

void BM_solve(benchmark::State& state) {
  const SpdMatrix c = random_spd(state.range(0), 5);
  const Vector v = random_vec(state.range(0), 6);
  for (auto _ : state) benchmark::DoNotOptimize(c.solve(v));
}
BENCHMARK(BM_solve)->Arg(4)->Arg(6);

void BM_quad_form(benchmark::State& state) {
  const SpdMatrix c = random_spd(state.range(0), 7);
  const Vector v = random_vec(state.range(0), 8);
  for (auto _ : state) benchmark::DoNotOptimize(quad_form(c, v));
}
BENCHMARK(BM_quad_form)->Arg(4)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
