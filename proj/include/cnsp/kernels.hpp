#pragma once

// Data-parallel kernels used by the spectral code.  Every kernel has a plain
// serial reference and an OpenMP version.  The OpenMP reductions sum fixed-size
// chunks and combine the partials in chunk order, so their result does not
// depend on the thread count.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cnsp::kernels {

using cd = std::complex<double>;

enum class Exec { serial, parallel };

Exec default_exec();
void set_default_exec(Exec e);
void set_threads(int n);
int threads();

constexpr std::size_t reduction_chunk = 4096;

// Each mode belongs to at most two adjacent dyadic blocks.  first[i] is the
// offset of the lower block (relative to j_min) or -1 for the zero mode.
struct ModeBlocks {
  int nblocks = 0;
  std::vector<int> first;
  std::vector<double> w0;
  std::vector<double> w1;
};

// out[b] += sum_i (w_b(i))^2 |z_i|^2, with an optional extra per-mode weight
void block_energies(const ModeBlocks& mb, std::span<const cd> z, std::span<const double> extra,
                    std::span<double> out, Exec e = default_exec());

double sum_abs_pow(std::span<const double> v, double p, Exec e = default_exec());
double max_abs(std::span<const double> v, Exec e = default_exec());

// state is component-major (c*N + i); mats holds one m x m row-major block per mode
void apply_mode_matrices(int m, std::span<const cd> mats, std::span<cd> state,
                         Exec e = default_exec());

} // namespace cnsp::kernels
