#include "cnsp/grid.hpp"
#include "cnsp/kernels.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace cnsp {

bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

Grid::Grid(int dim, int n, double box_length) : dim_(dim), n_(n), L_(box_length) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dim must be 1, 2 or 3");
  if (n < 8 || n % 2 != 0) throw std::invalid_argument("n must be even and at least 8");
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw std::invalid_argument("box length must be positive");
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= (std::size_t)n;
  mode_index_.resize(size_ * dim);
  k2_.resize(size_);
  kmag_.resize(size_);
  keep_.resize(size_);
  const double third = n / 3.0;
  for (std::size_t idx = 0; idx < size_; ++idx) {
    std::size_t rem = idx;
    double s = 0.0;
    bool keep = true;
    for (int a = dim - 1; a >= 0; --a) {
      int i = (int)(rem % n);
      rem /= n;
      int m = i < n / 2 ? i : i - n;
      mode_index_[idx * dim + a] = m;
      double kk = dk() * m;
      s += kk * kk;
      if (std::abs(m) > third) keep = false;
    }
    k2_[idx] = s;
    kmag_[idx] = std::sqrt(s);
    keep_[idx] = keep ? 1 : 0;
  }
}

double Grid::cell_volume() const { return std::pow(dx(), dim_); }
double Grid::volume() const { return std::pow(L_, dim_); }
double Grid::k_corner() const { return std::sqrt((double)dim_) * k_axis_max(); }

double Grid::x(std::size_t idx, int axis) const {
  std::size_t rem = idx;
  for (int a = dim_ - 1; a > axis; --a) rem /= n_;
  return dx() * (double)(rem % n_);
}

GridPtr make_grid(int dim, int n, double box_length) {
  return std::make_shared<const Grid>(dim, n, box_length);
}

PhysicalField::PhysicalField(GridPtr g, int components)
    : grid(std::move(g)), rank(components), data(grid->size() * components, 0.0) {}

std::span<double> PhysicalField::comp(int c) {
  return {data.data() + c * grid->size(), grid->size()};
}
std::span<const double> PhysicalField::comp(int c) const {
  return {data.data() + c * grid->size(), grid->size()};
}

SpectralField::SpectralField(GridPtr g, int components)
    : grid(std::move(g)), rank(components), data(grid->size() * components) {}

std::span<cd> SpectralField::comp(int c) { return {data.data() + c * grid->size(), grid->size()}; }
std::span<const cd> SpectralField::comp(int c) const {
  return {data.data() + c * grid->size(), grid->size()};
}

namespace {

struct PlanPair {
  fftw_plan fwd;
  fftw_plan inv;
};

std::mutex plan_mutex;

PlanPair plans_for(int dim, int n) {
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_pair(dim, n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  int dims[3] = {n, n, n};
  std::size_t size = 1;
  for (int a = 0; a < dim; ++a) size *= (std::size_t)n;
  // FFTW_ESTIMATE leaves the scratch array untouched
  std::vector<cd> scratch(size);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair pp{fftw_plan_dft(dim, dims, p, p, FFTW_FORWARD, flags),
              fftw_plan_dft(dim, dims, p, p, FFTW_BACKWARD, flags)};
  if (!pp.fwd || !pp.inv) throw std::runtime_error("FFTW planning failed");
  cache.emplace(key, pp);
  return pp;
}

} // namespace

void fft_forward(const Grid& g, std::span<cd> data) {
  auto pp = plans_for(g.dim(), g.n());
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(pp.fwd, p, p);
  const double s = 1.0 / (double)g.size();
  for (auto& z : data) z *= s;
}

void fft_inverse(const Grid& g, std::span<cd> data) { fft_inverse(g.dim(), g.n(), data); }

void fft_inverse(int dim, int n, std::span<cd> data) {
  auto pp = plans_for(dim, n);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(pp.inv, p, p);
}

SpectralField forward(const PhysicalField& f) {
  SpectralField out(f.grid, f.rank);
  for (int c = 0; c < f.rank; ++c) {
    auto src = f.comp(c);
    auto dst = out.comp(c);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
    fft_forward(*f.grid, dst);
  }
  return out;
}

PhysicalField inverse(const SpectralField& f) {
  PhysicalField out(f.grid, f.rank);
  std::vector<cd> buf(f.grid->size());
  for (int c = 0; c < f.rank; ++c) {
    auto src = f.comp(c);
    std::copy(src.begin(), src.end(), buf.begin());
    fft_inverse(*f.grid, buf);
    auto dst = out.comp(c);
    for (std::size_t i = 0; i < buf.size(); ++i) dst[i] = buf[i].real();
  }
  return out;
}

SpectralField derivative(const SpectralField& f, int axis) {
  const Grid& g = *f.grid;
  if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("derivative axis out of range");
  SpectralField out(f.grid, f.rank);
  for (int c = 0; c < f.rank; ++c) {
    auto src = f.comp(c);
    auto dst = out.comp(c);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] = cd(0.0, g.kd(i, axis)) * src[i];
  }
  return out;
}

SpectralField gradient(const SpectralField& scalar) {
  const Grid& g = *scalar.grid;
  if (scalar.rank != 1) throw std::invalid_argument("gradient expects a scalar field");
  SpectralField out(scalar.grid, g.dim());
  auto src = scalar.comp(0);
  for (int a = 0; a < g.dim(); ++a) {
    auto dst = out.comp(a);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] = cd(0.0, g.kd(i, a)) * src[i];
  }
  return out;
}

SpectralField divergence(const SpectralField& vec) {
  const Grid& g = *vec.grid;
  if (vec.rank != g.dim()) throw std::invalid_argument("divergence expects a vector field");
  SpectralField out(vec.grid, 1);
  auto dst = out.comp(0);
  for (int a = 0; a < g.dim(); ++a) {
    auto src = vec.comp(a);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += cd(0.0, g.kd(i, a)) * src[i];
  }
  return out;
}

namespace {
SpectralField compressible_part(const SpectralField& vec) {
  const Grid& g = *vec.grid;
  if (vec.rank != g.dim()) throw std::invalid_argument("projection expects a vector field");
  const int d = g.dim();
  SpectralField out(vec.grid, d);
  // differentiation wavenumbers, so that div P u = 0 and Q u is a gradient exactly
  for (std::size_t i = 0; i < g.size(); ++i) {
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) k2 += g.kd(i, a) * g.kd(i, a);
    if (k2 == 0.0) continue;
    cd kv = 0.0;
    for (int a = 0; a < d; ++a) kv += g.kd(i, a) * vec.data[a * g.size() + i];
    for (int a = 0; a < d; ++a) out.data[a * g.size() + i] = g.kd(i, a) * kv / k2;
  }
  return out;
}
} // namespace

SpectralField project_compressible(const SpectralField& vec) { return compressible_part(vec); }

SpectralField project_solenoidal(const SpectralField& vec) {
  SpectralField out = compressible_part(vec);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = vec.data[i] - out.data[i];
  return out;
}

SpectralField dealias(const SpectralField& f) {
  SpectralField out = f;
  dealias_inplace(out);
  return out;
}

void dealias_inplace(SpectralField& f) {
  const Grid& g = *f.grid;
  for (int c = 0; c < f.rank; ++c) {
    auto z = f.comp(c);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!g.dealias_keep(i)) z[i] = 0.0;
  }
}

double l2_norm_spectral(const SpectralField& f) {
  double s = 0.0;
  for (const auto& z : f.data) s += std::norm(z);
  return std::sqrt(f.grid->volume() * s);
}

namespace {
std::vector<double> magnitude(const PhysicalField& f) {
  if (f.rank == 1) return f.data;
  const std::size_t n = f.grid->size();
  std::vector<double> m(n, 0.0);
  for (int c = 0; c < f.rank; ++c) {
    auto v = f.comp(c);
    for (std::size_t i = 0; i < n; ++i) m[i] += v[i] * v[i];
  }
  for (auto& x : m) x = std::sqrt(x);
  return m;
}
} // namespace

double l2_norm_physical(const PhysicalField& f) { return lp_norm_physical(f, 2.0); }

// trapezoidal rule on the periodic lattice (spectrally accurate for smooth data)
double lp_norm_physical(const PhysicalField& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("Lebesgue exponent must be >= 1");
  auto m = magnitude(f);
  if (std::isinf(p)) return kernels::max_abs(m);
  double s = kernels::sum_abs_pow(m, p);
  return std::pow(f.grid->cell_volume() * s, 1.0 / p);
}

} // namespace cnsp
