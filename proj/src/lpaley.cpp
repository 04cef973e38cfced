#include "cnsp/lpaley.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace cnsp {

namespace {
constexpr double chi_lo = 0.75;
constexpr double chi_hi = 4.0 / 3.0;

double bump(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double a = bump(x), b = bump(1.0 - x);
  return a / (a + b);
}
} // namespace

double DyadicPartition::chi_exact(double r) {
  if (r <= chi_lo) return 1.0;
  if (r >= chi_hi) return 0.0;
  return smooth_step((chi_hi - r) / (chi_hi - chi_lo));
}

DyadicPartition::DyadicPartition(int samples) {
  if (samples < 16) throw std::invalid_argument("partition table too small");
  h_ = (chi_hi - chi_lo) / (samples - 1);
  table_.resize(samples);
  for (int i = 0; i < samples; ++i) table_[i] = chi_exact(chi_lo + i * h_);
}

// cubic Lagrange interpolation on the transition band, exact plateaus outside
double DyadicPartition::chi(double r) const {
  r = std::fabs(r);
  if (r <= chi_lo) return 1.0;
  if (r >= chi_hi) return 0.0;
  const int n = (int)table_.size();
  double u = (r - chi_lo) / h_;
  int i = std::clamp((int)std::floor(u) - 1, 0, n - 4);
  double x = u - i;
  const double* y = table_.data() + i;
  double l0 = -(x - 1) * (x - 2) * (x - 3) / 6.0;
  double l1 = x * (x - 2) * (x - 3) / 2.0;
  double l2 = -x * (x - 1) * (x - 3) / 2.0;
  double l3 = x * (x - 1) * (x - 2) / 6.0;
  return std::clamp(l0 * y[0] + l1 * y[1] + l2 * y[2] + l3 * y[3], 0.0, 1.0);
}

const DyadicPartition& partition() {
  static const DyadicPartition p;
  return p;
}

BlockRange block_range(const Grid& g) {
  BlockRange br{};
  br.j_min = (int)std::floor(std::log2(g.k_min() * 3.0 / 8.0));
  while (std::ldexp(8.0 / 3.0, br.j_min) <= g.k_min()) ++br.j_min;
  while (std::ldexp(8.0 / 3.0, br.j_min - 1) > g.k_min()) --br.j_min;
  br.j_max = (int)std::ceil(std::log2(g.k_corner() * 4.0 / 3.0));
  while (std::ldexp(0.75, br.j_max) >= g.k_corner()) --br.j_max;
  while (std::ldexp(0.75, br.j_max + 1) < g.k_corner()) ++br.j_max;
  return br;
}

BlockTable::BlockTable(const Grid& g) : range_(block_range(g)) {
  const auto& P = partition();
  const std::size_t n = g.size();
  mb_.nblocks = range_.count();
  mb_.first.assign(n, -1);
  mb_.w0.assign(n, 0.0);
  mb_.w1.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double r = g.kmag(i);
    if (r == 0.0) continue;
    // lower block: smallest j with r < 2^j 8/3
    int j = (int)std::floor(std::log2(r * 3.0 / 8.0));
    while (std::ldexp(8.0 / 3.0, j) <= r) ++j;
    while (std::ldexp(8.0 / 3.0, j - 1) > r) --j;
    j = std::max(j, range_.j_min);
    mb_.first[i] = j - range_.j_min;
    mb_.w0[i] = P.phi(std::ldexp(r, -j));
    mb_.w1[i] = j + 1 <= range_.j_max ? P.phi(std::ldexp(r, -(j + 1))) : 0.0;
  }
}

const BlockTable& block_table(const GridPtr& g) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, double>, std::unique_ptr<BlockTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(g->dim(), g->n(), g->box_length());
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<BlockTable>(*g)).first;
  return *it->second;
}

namespace {
template <class Fn> SpectralField multiply(const SpectralField& f, Fn weight) {
  const Grid& g = *f.grid;
  SpectralField out(f.grid, f.rank);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double w = weight(i);
    for (int c = 0; c < f.rank; ++c) out.data[c * g.size() + i] = w * f.data[c * g.size() + i];
  }
  return out;
}

double split_weight(const Grid& g, std::size_t i, const NormOptions& opt) {
  if (opt.part == Part::whole) return 1.0;
  double c = partition().chi(std::ldexp(g.kmag(i), -opt.j0));
  return opt.part == Part::low ? c : 1.0 - c;
}
} // namespace

SpectralField dyadic_block(const SpectralField& f, int j) {
  const Grid& g = *f.grid;
  const auto& P = partition();
  return multiply(f, [&](std::size_t i) {
    double r = g.kmag(i);
    return r == 0.0 ? 0.0 : P.phi(std::ldexp(r, -j));
  });
}

SpectralField low_frequency(const SpectralField& f, int j0) {
  const Grid& g = *f.grid;
  return multiply(f, [&](std::size_t i) { return partition().chi(std::ldexp(g.kmag(i), -j0)); });
}

SpectralField high_frequency(const SpectralField& f, int j0) {
  const Grid& g = *f.grid;
  return multiply(f,
                  [&](std::size_t i) { return 1.0 - partition().chi(std::ldexp(g.kmag(i), -j0)); });
}

SpectralField apply_lambda(const SpectralField& f, double power) {
  const Grid& g = *f.grid;
  return multiply(f, [&](std::size_t i) {
    double r = g.kmag(i);
    return r == 0.0 ? 0.0 : std::pow(r, power);
  });
}

std::vector<double> block_norms(const SpectralField& f, double p, const NormOptions& opt) {
  const Grid& g = *f.grid;
  const auto& bt = block_table(f.grid);
  const int nb = bt.range().count();
  if (!(p >= 1.0)) throw std::invalid_argument("Lebesgue exponent must be >= 1");

  std::vector<double> extra;
  if (opt.part != Part::whole || opt.lambda_power != 0.0) {
    extra.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      double w = split_weight(g, i, opt);
      double r = g.kmag(i);
      if (opt.lambda_power != 0.0) w *= r == 0.0 ? 0.0 : std::pow(r, opt.lambda_power);
      extra[i] = w * w;
    }
  }

  std::vector<double> out(nb, 0.0);
  if (p == 2.0) {
    for (int c = 0; c < f.rank; ++c) kernels::block_energies(bt.modes(), f.comp(c), extra, out);
    for (auto& x : out) x = std::sqrt(g.volume() * x);
    return out;
  }

  const auto& mb = bt.modes();
  for (int b = 0; b < nb; ++b) {
    SpectralField blk(f.grid, f.rank);
    for (std::size_t i = 0; i < g.size(); ++i) {
      int first = mb.first[i];
      double w = first == b ? mb.w0[i] : (first + 1 == b ? mb.w1[i] : 0.0);
      if (w == 0.0) continue;
      if (!extra.empty()) w *= std::sqrt(extra[i]);
      for (int c = 0; c < f.rank; ++c) blk.data[c * g.size() + i] = w * f.data[c * g.size() + i];
    }
    out[b] = lp_norm_physical(inverse(blk), p);
  }
  return out;
}

double besov_from_blocks(const std::vector<double>& b, int j_min, double s, double r, int jlo,
                         int jhi) {
  if (!(r >= 1.0)) throw std::invalid_argument("summability index must be >= 1");
  double acc = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    int j = j_min + (int)k;
    if (j < jlo || j > jhi) continue;
    double v = std::exp2(j * s) * b[k];
    if (std::isinf(r))
      acc = std::max(acc, v);
    else if (r == 1.0)
      acc += v;
    else
      acc += std::pow(v, r);
  }
  if (std::isinf(r) || r == 1.0) return acc;
  return std::pow(acc, 1.0 / r);
}

double besov_norm(const SpectralField& f, const BesovSpec& spec, const NormOptions& opt) {
  auto b = block_norms(f, spec.p, opt);
  return besov_from_blocks(b, block_table(f.grid).range().j_min, spec.s, spec.r);
}

void NormSeries::push(double time, std::vector<double> b) {
  if (!t.empty() && !(time > t.back())) throw std::invalid_argument("norm series times must increase");
  if (!blocks.empty() && b.size() != blocks.front().size())
    throw std::invalid_argument("norm series block count changed");
  t.push_back(time);
  blocks.push_back(std::move(b));
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

namespace {
double time_norm(const std::vector<double>& t, const std::vector<double>& y, double rho) {
  if (std::isinf(rho)) return y.empty() ? 0.0 : *std::max_element(y.begin(), y.end());
  if (!(rho >= 1.0)) throw std::invalid_argument("time exponent must be >= 1");
  if (rho == 1.0) return trapezoid(t, y);
  std::vector<double> yp(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) yp[i] = std::pow(y[i], rho);
  return std::pow(trapezoid(t, yp), 1.0 / rho);
}
} // namespace

double chemin_lerner_norm(const NormSeries& series, double rho, double s, double r, int jlo,
                          int jhi) {
  if (series.t.empty()) throw std::invalid_argument("empty norm series");
  const std::size_t nb = series.blocks.front().size();
  std::vector<double> per_block(nb);
  std::vector<double> y(series.t.size());
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t k = 0; k < series.t.size(); ++k) y[k] = series.blocks[k][b];
    per_block[b] = time_norm(series.t, y, rho);
  }
  return besov_from_blocks(per_block, series.j_min, s, r, jlo, jhi);
}

double time_lebesgue_of_besov(const NormSeries& series, double rho, double s, double r) {
  std::vector<double> y(series.t.size());
  for (std::size_t k = 0; k < series.t.size(); ++k)
    y[k] = besov_from_blocks(series.blocks[k], series.j_min, s, r);
  return time_norm(series.t, y, rho);
}

void write_block_csv_header(std::ostream& os) { os << "t,j,p,block_norm\n"; }

void write_block_csv(std::ostream& os, const NormSeries& series) {
  os.precision(17);
  for (std::size_t k = 0; k < series.t.size(); ++k)
    for (std::size_t b = 0; b < series.blocks[k].size(); ++b)
      os << series.t[k] << ',' << series.j_min + (int)b << ',' << series.p << ','
         << series.blocks[k][b] << '\n';
}

void write_besov_summary_header(std::ostream& os) { os << "quantity,t,s,p,r,value\n"; }

void write_besov_summary_row(std::ostream& os, const std::string& quantity, double t, double s,
                             double p, double r, double value) {
  os.precision(17);
  os << quantity << ',' << t << ',' << s << ',' << p << ',' << r << ',' << value << '\n';
}

} // namespace cnsp
