// Serial reference vs OpenMP kernels on a 256^2 spectral field.

#include "cnsp/grid.hpp"
#include "cnsp/kernels.hpp"
#include "cnsp/lpaley.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace cnsp;
namespace K = cnsp::kernels;

namespace {

std::vector<cd> random_modes(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<cd> z(n);
  for (auto& v : z) v = {N(rng), N(rng)};
  return z;
}

K::Exec exec_of(const benchmark::State& st) { return st.range(0) ? K::Exec::parallel : K::Exec::serial; }

void BM_block_energies(benchmark::State& st) {
  auto g = make_grid(2, 256, 64.0 * M_PI);
  const auto& mb = block_table(g).modes();
  auto z = random_modes(g->size());
  std::vector<double> out(mb.nblocks);
  for (auto _ : st) {
    std::fill(out.begin(), out.end(), 0.0);
    K::block_energies(mb, z, {}, out, exec_of(st));
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_block_energies)->Arg(0)->Arg(1);

void BM_sum_abs_pow(benchmark::State& st) {
  std::vector<double> v(1 << 18);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  for (auto& x : v) x = N(rng);
  for (auto _ : st) benchmark::DoNotOptimize(K::sum_abs_pow(v, 3.0, exec_of(st)));
}
BENCHMARK(BM_sum_abs_pow)->Arg(0)->Arg(1);

void BM_apply_mode_matrices(benchmark::State& st) {
  const std::size_t n = 1 << 16;
  const int m = 3;
  auto mats = random_modes(n * m * m);
  auto state = random_modes(n * m);
  for (auto _ : st) {
    K::apply_mode_matrices(m, mats, state, exec_of(st));
    benchmark::DoNotOptimize(state.data());
  }
}
BENCHMARK(BM_apply_mode_matrices)->Arg(0)->Arg(1);

} // namespace

BENCHMARK_MAIN();
