#include "cnsp/semigroup.hpp"
#include "cnsp/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace cnsp {

void ModelParams::validate() const {
  if (!std::isfinite(mu1_bar) || !std::isfinite(mu2_bar) || !std::isfinite(kappa) ||
      !std::isfinite(gamma))
    throw std::invalid_argument("model parameters must be finite");
  if (!(mu1_bar > 0.0)) throw std::invalid_argument("mu1_bar must be positive");
  if (!(mu_bar() > 0.0)) throw std::invalid_argument("2 mu1_bar + mu2_bar must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma = P'(1) must be positive");
}

Weighting parse_weighting(const std::string& s) {
  if (s == "hweighted") return Weighting::hweighted;
  if (s == "plain") return Weighting::plain;
  if (s == "balanced") return Weighting::balanced;
  throw std::invalid_argument("unknown weighting '" + s + "'");
}

std::string to_string(Weighting w) {
  switch (w) {
  case Weighting::hweighted: return "hweighted";
  case Weighting::plain: return "plain";
  case Weighting::balanced: return "balanced";
  }
  return "?";
}

namespace {

struct Roots {
  cd plus, minus, delta;
  double m;
  bool confluent;
};

Roots roots(double r, const ModelParams& prm) {
  const double r2 = r * r;
  const double c = prm.c(r2);
  const double mb = prm.mu_bar();
  Roots o{};
  o.m = -0.5 * mb * r2;
  const double D = mb * mb * r2 * r2 - 4.0 * c;
  o.delta = 0.5 * std::sqrt(cd(D, 0.0));
  o.minus = o.m - o.delta;
  // avoid cancellation in the slow root when both are real
  if (D > 0.0 && o.minus != 0.0)
    o.plus = c / o.minus;
  else
    o.plus = o.m + o.delta;
  o.confluent = std::abs(o.plus - o.minus) < 1e-8 * std::max(1.0, std::abs(o.plus));
  return o;
}

// sinh(z)/z and cosh(z) by their Taylor series, for |z| < 1/2
void small_z(cd z, cd& sinhc, cd& cosh) {
  cd z2 = z * z, term = 1.0;
  sinhc = 1.0;
  cosh = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= z2 / (double)(2 * k * (2 * k - 1));
    cosh += term;
    sinhc += term / (double)(2 * k + 1);
  }
}

} // namespace

Eigenvalues eigenvalues(double r, const ModelParams& prm) {
  auto o = roots(r, prm);
  return {o.plus, o.minus, o.confluent};
}

double critical_xi0(const ModelParams& prm) {
  // mu_bar^2 x^2 / 4 - gamma x - kappa = 0 in x = |xi|^2
  const double mb = prm.mu_bar();
  double disc = prm.gamma * prm.gamma + prm.kappa * mb * mb;
  if (disc < 0.0) throw std::domain_error("no oscillation-degeneracy radius for these parameters");
  double x = 2.0 * (prm.gamma + std::sqrt(disc)) / (mb * mb);
  return std::sqrt(x);
}

int default_j0(const ModelParams& prm) {
  ModelParams p = prm;
  if (p.kappa < 0.0) p.kappa = 0.0;  // unstable regime: split at the kappa = 0 radius
  return (int)std::floor(std::log2(0.5 * critical_xi0(p)));
}

GreenCoeffs green_coeffs(double t, double r, const ModelParams& prm) {
  GreenCoeffs g;
  if (r == 0.0) {
    g.E = 0.0;
    g.p1 = 1.0;
    g.L = 1.0;
    g.p0 = 1.0;
    auto o = roots(0.0, prm);
    g.lambda_plus = o.plus;
    g.lambda_minus = o.minus;
    g.confluent = o.confluent;
    return g;
  }
  auto o = roots(r, prm);
  g.lambda_plus = o.plus;
  g.lambda_minus = o.minus;
  g.confluent = o.confluent;
  g.p0 = std::exp(-prm.mu1_bar * r * r * t);
  const cd z = o.delta * t;
  if (std::abs(z) < 0.5) {
    cd sc, ch;
    small_z(z, sc, ch);
    const double em = std::exp(o.m * t);
    g.E = em * t * sc;
    cd c = em * ch;
    g.p1 = c - o.m * g.E;
    g.L = c + o.m * g.E;
  } else {
    const cd ep = std::exp(o.plus * t), em = std::exp(o.minus * t);
    const cd diff = o.plus - o.minus;
    g.E = (ep - em) / diff;
    g.p1 = (o.plus * em - o.minus * ep) / diff;
    g.L = (o.plus * ep - o.minus * em) / diff;
  }
  return g;
}

double weight_forward(double r, const ModelParams& prm, Weighting w) {
  switch (w) {
  case Weighting::hweighted: return 1.0 + r * r;
  case Weighting::plain: return 1.0;
  case Weighting::balanced: return std::sqrt(std::fabs(prm.c(r * r)));
  }
  return 1.0;
}

double weight_backward(double r, const ModelParams& prm, Weighting w) {
  const double c = prm.c(r * r);
  switch (w) {
  case Weighting::hweighted: return c / (1.0 + r * r);
  case Weighting::plain: return c;
  case Weighting::balanced: return c / std::sqrt(std::fabs(c));
  }
  return c;
}

namespace {
double norm_of(std::span<const double> xi) {
  double s = 0.0;
  for (double x : xi) s += x * x;
  return std::sqrt(s);
}
} // namespace

GreenSymbol green_symbol(double t, std::span<const double> xi, const ModelParams& prm,
                         Weighting w) {
  if (!(t >= 0.0)) throw std::invalid_argument("green_symbol needs t >= 0");
  const int d = (int)xi.size();
  const double r = norm_of(xi);
  if (!std::isfinite(r)) throw std::invalid_argument("green_symbol needs a finite frequency");
  auto gc = green_coeffs(t, r, prm);
  GreenSymbol s;
  s.lambda_plus = gc.lambda_plus;
  s.lambda_minus = gc.lambda_minus;
  s.B = cd(0.0, -1.0) * (gc.lambda_plus - gc.lambda_minus) * 0.5;
  s.confluent = gc.confluent;
  s.p0 = gc.p0;
  s.p1 = gc.p1;
  s.matrix = CMat::Identity(d + 1, d + 1);
  if (r == 0.0) return s;
  const cd I(0.0, 1.0);
  const double hf = weight_forward(r, prm, w), hb = weight_backward(r, prm, w);
  s.p2 = I * hf * gc.E / r;
  s.p3 = I * hb * gc.E / r;
  s.p4 = (gc.L - gc.p0) / (r * r);
  s.matrix(0, 0) = gc.p1;
  for (int i = 0; i < d; ++i) {
    const double ui = xi[i] / r;
    s.matrix(0, i + 1) = -I * hf * gc.E * ui;
    s.matrix(i + 1, 0) = -I * hb * gc.E * ui;
    for (int l = 0; l < d; ++l)
      s.matrix(i + 1, l + 1) = (i == l ? gc.p0 : 0.0) + (gc.L - gc.p0) * ui * (xi[l] / r);
  }
  return s;
}

CMat generator(std::span<const double> xi, const ModelParams& prm, Weighting w) {
  const int d = (int)xi.size();
  const double r = norm_of(xi);
  CMat M = CMat::Zero(d + 1, d + 1);
  const cd I(0.0, 1.0);
  for (int i = 0; i < d; ++i)
    for (int l = 0; l < d; ++l)
      M(i + 1, l + 1) = (i == l ? -prm.mu1_bar * r * r : 0.0) - (prm.mu1_bar + prm.mu2_bar) * xi[i] * xi[l];
  if (r == 0.0) return M;
  const double hf = weight_forward(r, prm, w), hb = weight_backward(r, prm, w);
  for (int i = 0; i < d; ++i) {
    M(0, i + 1) = -I * hf * (xi[i] / r);
    M(i + 1, 0) = -I * hb * (xi[i] / r);
  }
  return M;
}

CMat matexp_oracle(double t, std::span<const double> xi, const ModelParams& prm, Weighting w) {
  if (!(t >= 0.0)) throw std::invalid_argument("matexp_oracle needs t >= 0");
  return expm(t * generator(xi, prm, w));
}

void plain_propagator(double t, std::span<const double> xi, const ModelParams& prm, cd* out) {
  const int d = (int)xi.size(), m = d + 1;
  const double r = norm_of(xi);
  for (int k = 0; k < m * m; ++k) out[k] = 0.0;
  if (r == 0.0) {
    for (int k = 0; k < m; ++k) out[k * m + k] = 1.0;
    return;
  }
  auto gc = green_coeffs(t, r, prm);
  const cd I(0.0, 1.0);
  const double cr = prm.c(r * r) / (r * r);
  out[0] = gc.p1;
  for (int i = 0; i < d; ++i) {
    out[i + 1] = -I * gc.E * xi[i];
    out[(i + 1) * m] = -I * cr * gc.E * xi[i];
    for (int l = 0; l < d; ++l)
      out[(i + 1) * m + l + 1] = (i == l ? gc.p0 : 0.0) + (gc.L - gc.p0) * xi[i] * xi[l] / (r * r);
  }
}

PropagatorTable propagator_table(const Grid& g, double dt, const ModelParams& prm) {
  PropagatorTable tab;
  const int d = g.dim();
  tab.m = d + 1;
  tab.mats.assign(g.size() * tab.m * tab.m, 0.0);
  const std::ptrdiff_t n = g.size();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double xi[3];
    for (int a = 0; a < d; ++a) xi[a] = g.k(i, a);
    plain_propagator(dt, {xi, (std::size_t)d}, prm, tab.mats.data() + i * tab.m * tab.m);
  }
  return tab;
}

void apply_semigroup(double t, SpectralField& a, SpectralField& u, const ModelParams& prm) {
  if (!(t >= 0.0)) throw std::invalid_argument("apply_semigroup needs t >= 0");
  if (a.rank != 1 || u.rank != a.grid->dim() || a.grid != u.grid)
    throw std::invalid_argument("apply_semigroup expects a scalar a and a vector u on one grid");
  const Grid& g = *a.grid;
  auto tab = propagator_table(g, t, prm);
  const int m = tab.m;
  std::vector<cd> state(g.size() * m);
  std::copy(a.data.begin(), a.data.end(), state.begin());
  std::copy(u.data.begin(), u.data.end(), state.begin() + g.size());
  kernels::apply_mode_matrices(m, tab.mats, state);
  std::copy(state.begin(), state.begin() + g.size(), a.data.begin());
  std::copy(state.begin() + g.size(), state.end(), u.data.begin());
}

} // namespace cnsp
