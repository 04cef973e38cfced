#include "cnsp/kernel_probe.hpp"
#include "cnsp/lpaley.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <cmath>
#include <stdexcept>

namespace cnsp {

namespace {

constexpr double block_edge = 8.0 / 3.0;

int next_pow2(double x) {
  int n = 8;
  while (n < x) n *= 2;
  return n;
}

struct AuxBox {
  int n;
  double L;
  double oversample;
  bool truncated;
};

AuxBox choose_box(int dim, double R, const KernelProbeOptions& opt) {
  double L = 2.0 * R;
  for (double os : {opt.oversample, opt.min_oversample}) {
    int n = next_pow2(os * block_edge * L / M_PI);
    if (n <= opt.max_n) return {n, L, n * M_PI / (L * block_edge), false};
  }
  if (!opt.allow_truncation)
    throw std::runtime_error("insufficient resolution/extent for requested j: box of " +
                             std::to_string(L) + " rescaled units needs more than " +
                             std::to_string(opt.max_n) + " points per axis in dimension " +
                             std::to_string(dim));
  int n = opt.max_n;
  return {n, n * M_PI / (opt.min_oversample * block_edge), opt.min_oversample, true};
}

// largest secant slope of B over block j, where lambda = m +- iB.  The coarse
// sampling keeps the square-root corner at xi0 from dominating.
double max_group_speed(int j, const ModelParams& prm) {
  const int ns = 32;
  const double lo = 0.75 * std::ldexp(1.0, j), hi = block_edge * std::ldexp(1.0, j);
  auto B = [&](double r) {
    auto e = eigenvalues(r, prm);
    return std::fabs(0.5 * (e.plus - e.minus).imag());
  };
  double v = 0.0, h = (hi - lo) / ns;
  for (int k = 0; k < ns; ++k) v = std::max(v, std::fabs(B(lo + (k + 1) * h) - B(lo + k * h)) / h);
  return v;
}

// lattice points of the box with |eta| < 8/3, in FFT storage order
struct Support {
  std::vector<std::size_t> index;
  std::vector<std::array<double, 3>> eta;
};

Support support_points(int dim, int n, double L) {
  Support s;
  const double de = 2.0 * M_PI / L;
  const int M = std::min(n / 2 - 1, (int)std::ceil(block_edge / de));
  int m[3] = {0, 0, 0};
  auto wrap = [&](int v) { return (std::size_t)(v < 0 ? v + n : v); };
  std::function<void(int)> rec = [&](int axis) {
    if (axis == dim) {
      std::array<double, 3> e{0.0, 0.0, 0.0};
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        e[a] = de * m[a];
        r2 += e[a] * e[a];
      }
      if (r2 >= block_edge * block_edge || r2 == 0.0) return;
      std::size_t idx = 0;
      for (int a = 0; a < dim; ++a) idx = idx * n + wrap(m[a]);
      s.index.push_back(idx);
      s.eta.push_back(e);
      return;
    }
    for (m[axis] = -M; m[axis] <= M; ++m[axis]) rec(axis + 1);
  };
  rec(0);
  return s;
}

std::size_t box_size(int dim, int n) {
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= (std::size_t)n;
  return s;
}

// L^1 norm and share of mass in the outer band for the synthesized kernel
std::pair<double, double> l1_of(int dim, int n, std::vector<cd>& buf) {
  fft_inverse(dim, n, buf);
  const double inner = 0.4 * n;
  double tot = 0.0, edge = 0.0;
  const std::size_t N = buf.size();
  for (std::size_t idx = 0; idx < N; ++idx) {
    double v = std::abs(buf[idx]);
    tot += v;
    std::size_t rem = idx;
    bool outer = false;
    for (int a = 0; a < dim; ++a) {
      int i = (int)(rem % n);
      rem /= n;
      int dist = std::min(i, n - i);
      if (dist > inner) outer = true;
    }
    if (outer) edge += v;
  }
  return {tot / (double)N, tot > 0.0 ? edge / tot : 0.0};
}

} // namespace

std::vector<std::pair<int, int>> representative_entries(int dim) {
  std::vector<std::pair<int, int>> e{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  if (dim >= 2) e.emplace_back(1, 2);
  return e;
}

std::vector<KernelSample> kernel_l1_profile(int j, std::span<const double> t_list, int dim,
                                            const ModelParams& prm,
                                            const KernelProbeOptions& opt) {
  prm.validate();
  if (dim < 1 || dim > 3) throw std::invalid_argument("dim must be 1, 2 or 3");
  const double v = max_group_speed(j, prm);
  const auto entries = representative_entries(dim);
  const auto& P = partition();
  std::vector<KernelSample> out;
  for (double t : t_list) {
    if (!(t >= 0.0)) throw std::invalid_argument("kernel probe times must be >= 0");
    KernelSample ks;
    ks.j = j;
    ks.t = t;
    ks.tau = t * std::ldexp(1.0, 2 * j);
    const double R = opt.radius + 1.25 * std::ldexp(1.0, j) * t * v;
    auto box = choose_box(dim, R, opt);
    ks.n_aux = box.n;
    ks.box = box.L;
    ks.oversample = box.oversample;
    ks.truncated = box.truncated;
    if (ks.truncated) {
      // the periodized kernel would only give a lower bound; not evaluated
      ks.value = std::numeric_limits<double>::quiet_NaN();
      out.push_back(std::move(ks));
      continue;
    }

    auto sup = support_points(dim, box.n, box.L);
    const std::size_t ns = sup.index.size();
    std::vector<GreenCoeffs> gc(ns);
    std::vector<double> ph(ns), hf(ns), hb(ns);
    const double scale = std::ldexp(1.0, j);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t q = 0; q < (std::ptrdiff_t)ns; ++q) {
      const auto& e = sup.eta[q];
      double re = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
      ph[q] = P.phi(re);
      gc[q] = green_coeffs(t, scale * re, prm);
      hf[q] = weight_forward(scale * re, prm, opt.weighting);
      hb[q] = weight_backward(scale * re, prm, opt.weighting);
    }

    std::vector<cd> buf(box_size(dim, box.n));
    const cd I(0.0, 1.0);
    double edge = 0.0;
    for (auto [row, col] : entries) {
      std::fill(buf.begin(), buf.end(), cd(0.0));
      for (std::size_t q = 0; q < ns; ++q) {
        const auto& e = sup.eta[q];
        double re = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
        const auto& g = gc[q];
        cd val;
        if (row == 0 && col == 0)
          val = g.p1;
        else if (row == 0)
          val = -I * hf[q] * g.E * (e[col - 1] / re);
        else if (col == 0)
          val = -I * hb[q] * g.E * (e[row - 1] / re);
        else
          val = (row == col ? g.p0 : 0.0) + (g.L - g.p0) * (e[row - 1] / re) * (e[col - 1] / re);
        buf[sup.index[q]] = val * ph[q];
      }
      auto [l1, ef] = l1_of(dim, box.n, buf);
      ks.entries.push_back(l1);
      if (l1 >= ks.value) {
        ks.value = l1;
        edge = ef;
      }
    }
    ks.edge_fraction = edge;
    out.push_back(std::move(ks));
  }
  return out;
}

std::vector<double> weighted_sups(const std::vector<std::vector<KernelSample>>& profiles, double r0,
                                  std::vector<bool>* rising_at_end) {
  std::vector<double> sups;
  if (rising_at_end) rising_at_end->clear();
  for (const auto& prof : profiles) {
    std::vector<double> tau, w;
    for (const auto& s : prof) {
      if (s.truncated) break;
      tau.push_back(s.tau);
      w.push_back(std::exp(r0 * s.tau) * s.value);
    }
    if (w.empty()) throw std::runtime_error("kernel profile has no usable sample");
    sups.push_back(*std::max_element(w.begin(), w.end()));
    if (rising_at_end) {
      // least-squares slope of log w over the second half of the window
      std::size_t k0 = w.size() / 2;
      double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t k = k0; k < w.size(); ++k) {
        if (!(w[k] > 0.0)) continue;
        double y = std::log(w[k]);
        n += 1;
        sx += tau[k];
        sy += y;
        sxx += tau[k] * tau[k];
        sxy += tau[k] * y;
      }
      bool rising = n >= 3 && (n * sxy - sx * sy) / (n * sxx - sx * sx) > 0.0;
      rising_at_end->push_back(rising);
    }
  }
  return sups;
}

BoundFit fit_kernel_bound(const std::vector<std::vector<KernelSample>>& profiles,
                          double ratio_limit, double r0_max) {
  BoundFit fit;
  for (const auto& p : profiles) fit.js.push_back(p.empty() ? 0 : p.front().j);
  const int steps = (int)std::round(r0_max * 200.0);
  for (int k = 0; k <= steps; ++k) {
    double r0 = k / 200.0;
    std::vector<bool> rising;
    auto s = weighted_sups(profiles, r0, &rising);
    double hi = *std::max_element(s.begin(), s.end());
    double lo = *std::min_element(s.begin(), s.end());
    bool ok = hi / lo < ratio_limit &&
              std::none_of(rising.begin(), rising.end(), [](bool b) { return b; });
    if (ok) {
      fit.found = true;
      fit.r0 = r0;
      fit.sups = s;
      fit.ratio = hi / lo;
    }
  }
  if (!fit.found) {
    fit.sups = weighted_sups(profiles, 0.0);
    fit.ratio = *std::max_element(fit.sups.begin(), fit.sups.end()) /
                *std::min_element(fit.sups.begin(), fit.sups.end());
  }
  return fit;
}

double log2_slope(const std::vector<int>& js, const std::vector<double>& y) {
  if (js.size() != y.size() || js.size() < 2) throw std::invalid_argument("slope needs >= 2 points");
  const double n = (double)js.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < js.size(); ++i) {
    double x = js[i], l = std::log2(y[i]);
    sx += x;
    sy += l;
    sxx += x * x;
    sxy += x * l;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double dispersion_growth(int j, double t, int dim, const ModelParams& prm) {
  prm.validate();
  const double scale = std::ldexp(1.0, j);
  const double r_hi = block_edge * scale;
  const double mb = prm.mu_bar();
  if (prm.c(r_hi * r_hi) - 0.25 * mb * mb * std::pow(r_hi, 4) <= 0.0 || prm.kappa < 0.0)
    throw std::domain_error("dispersion_growth needs a real phase B on the whole block");
  KernelProbeOptions opt;
  opt.max_n = dim == 1 ? 1 << 16 : (dim == 2 ? 4096 : 256);
  const double v = max_group_speed(j, prm);
  auto box = choose_box(dim, opt.radius + 1.25 * scale * t * v, opt);
  auto sup = support_points(dim, box.n, box.L);
  const auto& P = partition();
  std::vector<cd> buf(box_size(dim, box.n));
  auto fill = [&](double time) {
    std::fill(buf.begin(), buf.end(), cd(0.0));
    for (std::size_t q = 0; q < sup.index.size(); ++q) {
      const auto& e = sup.eta[q];
      double re = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
      double r = scale * re;
      double B = std::sqrt(prm.c(r * r) - 0.25 * mb * mb * r * r * r * r);
      buf[sup.index[q]] = std::exp(cd(0.0, B * time)) * P.phi(re);
    }
  };
  fill(0.0);
  double base = l1_of(dim, box.n, buf).first;
  fill(t);
  double val = l1_of(dim, box.n, buf).first;
  return val / base;
}

} // namespace cnsp
