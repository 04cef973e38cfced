#include "cnsp/kernels.hpp"

#include <doctest.h>

#include <random>

using namespace cnsp::kernels;

namespace {

std::vector<cd> random_c(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<cd> z(n);
  for (auto& v : z) v = {N(rng), N(rng)};
  return z;
}

ModeBlocks random_blocks(std::size_t n, int nb, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> B(-1, nb - 1);
  std::uniform_real_distribution<double> W(0.0, 1.0);
  ModeBlocks mb;
  mb.nblocks = nb;
  for (std::size_t i = 0; i < n; ++i) {
    mb.first.push_back(B(rng));
    double w = W(rng);
    mb.w0.push_back(w);
    mb.w1.push_back(std::sqrt(1.0 - w * w));
  }
  return mb;
}

} // namespace

TEST_CASE("parallel kernels agree with the serial reference") {
  const std::size_t n = 3 * reduction_chunk + 517;
  auto z = random_c(n, 1);
  auto mb = random_blocks(n, 9, 2);
  std::vector<double> extra(n);
  for (std::size_t i = 0; i < n; ++i) extra[i] = 1.0 + 0.001 * i;

  std::vector<double> s(9, 0.0), p(9, 0.0);
  block_energies(mb, z, extra, s, Exec::serial);
  block_energies(mb, z, extra, p, Exec::parallel);
  for (int b = 0; b < 9; ++b) CHECK(p[b] == doctest::Approx(s[b]).epsilon(1e-13));

  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = z[i].real();
  for (double q : {1.0, 2.0, 3.5})
    CHECK(sum_abs_pow(v, q, Exec::parallel) ==
          doctest::Approx(sum_abs_pow(v, q, Exec::serial)).epsilon(1e-13));
  CHECK(max_abs(v, Exec::parallel) == max_abs(v, Exec::serial));

  const int m = 3;
  auto mats = random_c(n * m * m, 3);
  auto st_s = random_c(n * m, 4), st_p = st_s;
  apply_mode_matrices(m, mats, st_s, Exec::serial);
  apply_mode_matrices(m, mats, st_p, Exec::parallel);
  CHECK(st_s == st_p);
}

TEST_CASE("parallel reductions do not depend on the thread count") {
  const std::size_t n = 10 * reduction_chunk + 3;
  auto z = random_c(n, 7);
  auto mb = random_blocks(n, 6, 8);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = z[i].imag();
  const int saved = threads();
  std::vector<std::vector<double>> blocks;
  std::vector<double> sums;
  for (int t : {1, 2, 3, 5}) {
    set_threads(t);
    std::vector<double> out(6, 0.0);
    block_energies(mb, z, {}, out, Exec::parallel);
    blocks.push_back(out);
    sums.push_back(sum_abs_pow(v, 2.0, Exec::parallel));
  }
  set_threads(saved);
  for (std::size_t k = 1; k < blocks.size(); ++k) {
    CHECK(blocks[k] == blocks[0]);
    CHECK(sums[k] == sums[0]);
  }
  CHECK_THROWS(set_threads(0));
}

TEST_CASE("size mismatches are rejected") {
  auto mb = random_blocks(10, 3, 1);
  auto z = random_c(11, 1);
  std::vector<double> out(3);
  CHECK_THROWS(block_energies(mb, z, {}, out));
}
