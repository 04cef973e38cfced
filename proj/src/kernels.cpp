#include "cnsp/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace cnsp::kernels {

namespace {
std::atomic<Exec> g_exec{Exec::parallel};

inline double powabs(double x, double p) {
  double a = std::fabs(x);
  if (p == 2.0) return a * a;
  if (p == 1.0) return a;
  return std::pow(a, p);
}

std::size_t nchunks(std::size_t n) { return (n + reduction_chunk - 1) / reduction_chunk; }
} // namespace

Exec default_exec() { return g_exec.load(); }
void set_default_exec(Exec e) { g_exec.store(e); }

void set_threads(int n) {
  if (n < 1) throw std::invalid_argument("thread count must be positive");
  omp_set_num_threads(n);
}

int threads() { return omp_get_max_threads(); }

void block_energies(const ModeBlocks& mb, std::span<const cd> z, std::span<const double> extra,
                    std::span<double> out, Exec e) {
  const std::size_t n = z.size();
  if (mb.first.size() != n) throw std::invalid_argument("block table does not match field size");
  if ((int)out.size() != mb.nblocks) throw std::invalid_argument("block output size mismatch");
  const bool has_extra = !extra.empty();

  if (e == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) {
      int b = mb.first[i];
      if (b < 0) continue;
      double q = std::norm(z[i]);
      if (has_extra) q *= extra[i];
      out[b] += mb.w0[i] * mb.w0[i] * q;
      if (b + 1 < mb.nblocks) out[b + 1] += mb.w1[i] * mb.w1[i] * q;
    }
    return;
  }

  const std::size_t nc = nchunks(n);
  const int nb = mb.nblocks;
  std::vector<double> part(nc * nb, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < (std::ptrdiff_t)nc; ++c) {
    double* acc = part.data() + c * nb;
    std::size_t lo = c * reduction_chunk, hi = std::min(n, lo + reduction_chunk);
    for (std::size_t i = lo; i < hi; ++i) {
      int b = mb.first[i];
      if (b < 0) continue;
      double q = std::norm(z[i]);
      if (has_extra) q *= extra[i];
      acc[b] += mb.w0[i] * mb.w0[i] * q;
      if (b + 1 < nb) acc[b + 1] += mb.w1[i] * mb.w1[i] * q;
    }
  }
  for (std::size_t c = 0; c < nc; ++c)
    for (int b = 0; b < nb; ++b) out[b] += part[c * nb + b];
}

double sum_abs_pow(std::span<const double> v, double p, Exec e) {
  const std::size_t n = v.size();
  if (e == Exec::serial) {
    double s = 0.0;
    for (double x : v) s += powabs(x, p);
    return s;
  }
  const std::size_t nc = nchunks(n);
  std::vector<double> part(nc, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < (std::ptrdiff_t)nc; ++c) {
    std::size_t lo = c * reduction_chunk, hi = std::min(n, lo + reduction_chunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += powabs(v[i], p);
    part[c] = s;
  }
  double s = 0.0;
  for (double x : part) s += x;
  return s;
}

double max_abs(std::span<const double> v, Exec e) {
  double m = 0.0;
  if (e == Exec::serial) {
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
  }
  const std::ptrdiff_t n = v.size();
#pragma omp parallel for reduction(max : m) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) m = std::max(m, std::fabs(v[i]));
  return m;
}

void apply_mode_matrices(int m, std::span<const cd> mats, std::span<cd> state, Exec e) {
  const std::size_t n = state.size() / m;
  if (mats.size() != n * m * m) throw std::invalid_argument("mode matrix table size mismatch");
  auto body = [&](std::size_t i) {
    cd x[8], y[8];
    for (int c = 0; c < m; ++c) x[c] = state[c * n + i];
    const cd* M = mats.data() + i * m * m;
    for (int r = 0; r < m; ++r) {
      cd s = 0.0;
      for (int c = 0; c < m; ++c) s += M[r * m + c] * x[c];
      y[r] = s;
    }
    for (int r = 0; r < m; ++r) state[r * n + i] = y[r];
  };
  if (m > 8) throw std::invalid_argument("mode matrices larger than 8x8 are not supported");
  if (e == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < (std::ptrdiff_t)n; ++i) body(i);
}

} // namespace cnsp::kernels
