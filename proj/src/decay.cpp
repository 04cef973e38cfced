#include "cnsp/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cnsp {

Flavor parse_flavor(const std::string& s) {
  if (s == "deterministic_powerlaw") return Flavor::deterministic_powerlaw;
  if (s == "random_phase") return Flavor::random_phase;
  throw std::invalid_argument("unknown profile flavor '" + s + "'");
}

Anchor parse_anchor(const std::string& s) {
  if (s == "lambda_inv_a") return Anchor::lambda_inv_a;
  if (s == "a") return Anchor::a;
  throw std::invalid_argument("unknown profile anchor '" + s + "'");
}

std::string to_string(Flavor f) {
  return f == Flavor::random_phase ? "random_phase" : "deterministic_powerlaw";
}

std::string to_string(Anchor a) { return a == Anchor::a ? "a" : "lambda_inv_a"; }

std::string to_string(Quantity q) {
  switch (q) {
  case Quantity::density: return "density";
  case Quantity::momentum: return "momentum";
  case Quantity::velocity: return "velocity";
  }
  return "?";
}

double sigma0(int dim, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  if (p >= 2.0 && p < 2.0 * dim) return -dim / p;
  if (p < 2.0) {
    double pp = p == 1.0 ? inf : p / (p - 1.0);
    return std::isinf(pp) ? 0.0 : -dim / pp;
  }
  throw std::invalid_argument("sigma_0 is defined for 1 <= p < 2d");
}

void DecayProfile::validate(int dim) const {
  if (!std::isfinite(amplitude) || amplitude < 0.0)
    throw std::invalid_argument("profile amplitude must be finite and >= 0");
  const double s1 = theorem_sigma1();
  const double lo = sigma0(dim, p) - 1.0, hi = dim / p - 1.0;
  if (!(s1 >= lo && s1 < hi)) {
    std::ostringstream os;
    os << "sigma1 = " << s1 << " violates sigma0 - 1 = " << lo << " <= sigma1 < d/p - 1 = " << hi;
    throw std::invalid_argument(os.str());
  }
}

double predicted_exponent(Quantity q, double sigma, double sigma1, int dim, double p) {
  const double dp = dim / p;
  std::ostringstream os;
  switch (q) {
  case Quantity::density:
    if (!(sigma > sigma1 - 1.0 && sigma <= dp)) {
      os << "density rate needs sigma1 - 1 < sigma <= d/p (sigma = " << sigma
         << ", sigma1 = " << sigma1 << ", d/p = " << dp << ")";
      throw std::domain_error(os.str());
    }
    return 0.5 * (sigma - sigma1 + 1.0);
  case Quantity::momentum:
    if (!(sigma > sigma1 && sigma <= dp)) {
      os << "momentum rate needs sigma1 < sigma <= d/p (sigma = " << sigma
         << ", sigma1 = " << sigma1 << ", d/p = " << dp << ")";
      throw std::domain_error(os.str());
    }
    return 0.5 * (sigma - sigma1);
  case Quantity::velocity: {
    const double lo = std::min(sigma0(dim, p), sigma1);
    if (!(sigma > lo && sigma <= dp + 1.0)) {
      os << "velocity rate needs min(sigma0, sigma1) < sigma <= d/p + 1 (sigma = " << sigma
         << ", min = " << lo << ", d/p + 1 = " << dp + 1.0 << ")";
      throw std::domain_error(os.str());
    }
    return 0.5 * (sigma - sigma1);
  }
  }
  return 0.0;
}

double box_valid_until(const Grid& g, double alpha) {
  double r = g.box_length() / (2.0 * M_PI);
  return alpha * r * r;
}

// ---------------------------------------------------------------------------
// initial data

namespace {

std::size_t partner(const Grid& g, std::size_t q) {
  const int n = g.n();
  std::size_t idx = 0;
  for (int a = 0; a < g.dim(); ++a) {
    int m = g.mode_index(q, a);
    int pm = ((-m) % n + n) % n;
    idx = idx * n + pm;
  }
  return idx;
}

bool on_nyquist(const Grid& g, std::size_t q) {
  for (int a = 0; a < g.dim(); ++a)
    if (g.is_nyquist(q, a)) return true;
  return false;
}

// Thomas algorithm; sub[i] couples i to i-1, sup[i] couples i to i+1
std::vector<double> solve_tridiagonal(std::vector<double> sub, std::vector<double> diag,
                                      std::vector<double> sup, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    x[k] = rhs[k];
    if (k + 1 < n) x[k] -= sup[k] * x[k + 1];
    x[k] /= diag[k];
  }
  return x;
}

} // namespace

CnspState synth_initial(const DecayProfile& prof, GridPtr g, int j0, Form form) {
  const Grid& G = *g;
  const int d = G.dim();
  prof.validate(d);
  const auto& bt = block_table(g);
  const auto& mb = bt.modes();
  const BlockRange br = bt.range();
  if (j0 - br.j_min < 2 || j0 + 1 > br.j_max) {
    std::ostringstream os;
    os << "box cannot carry the profile: j0 = " << j0 << " needs j_min + 2 <= j0 < j_max (blocks "
       << br.j_min << ".." << br.j_max << ")";
    throw std::invalid_argument(os.str());
  }

  CnspState st;
  st.form = Form::momentum;
  st.a = SpectralField(g, 1);
  st.v = SpectralField(g, d);
  if (prof.amplitude == 0.0) return form == Form::momentum ? st : to_form(st, form);

  // targets on blocks j_min..j0+1
  const int nb = j0 + 1 - br.j_min + 1;
  std::vector<double> target(nb);
  for (int b = 0; b < nb; ++b) {
    int j = br.j_min + b;
    double t = prof.amplitude * std::exp2(-j * prof.sigma1);
    if (j == j0 + 1) t *= 0.25;
    target[b] = t * t;
  }

  // C_{b b'} = V sum_q w_b^2 w_b'^2
  std::vector<double> diag(nb, 0.0), off(nb, 0.0);
  for (std::size_t q = 0; q < G.size(); ++q) {
    int b = mb.first[q];
    if (b < 0) continue;
    double w0 = mb.w0[q] * mb.w0[q], w1 = mb.w1[q] * mb.w1[q];
    if (b < nb) diag[b] += w0 * w0;
    if (b + 1 < nb) {
      diag[b + 1] += w1 * w1;
      off[b] += w0 * w1;
    }
  }
  const double V = G.volume();
  std::vector<double> sub(nb, 0.0), sup(nb, 0.0);
  for (int b = 0; b < nb; ++b) {
    diag[b] *= V;
    if (b + 1 < nb) sup[b] = V * off[b];
    if (b > 0) sub[b] = V * off[b - 1];
  }
  auto beta = solve_tridiagonal(sub, diag, sup, target);
  for (int b = 0; b < nb; ++b)
    if (!(beta[b] >= 0.0) || diag[b] == 0.0) {
      std::ostringstream os;
      os << "sigma1 = " << prof.sigma1 << " is not reachable on this box (block " << br.j_min + b
         << " has no admissible weight)";
      throw std::invalid_argument(os.str());
    }

  std::mt19937_64 rng(prof.seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  const std::size_t n = G.size();
  const double share = 1.0 / std::sqrt((double)d);
  for (std::size_t q = 0; q < n; ++q) {
    if (G.kmag(q) == 0.0 || on_nyquist(G, q)) continue;
    std::size_t pq = partner(G, q);
    if (pq < q) continue;
    int b = mb.first[q];
    double M = 0.0;
    if (b < nb) M += beta[b] * mb.w0[q] * mb.w0[q];
    if (b + 1 < nb) M += beta[b + 1] * mb.w1[q] * mb.w1[q];
    if (M == 0.0) continue;
    double mod = std::sqrt(M);
    double th[4] = {0.0, 0.0, 0.0, 0.0};
    if (prof.flavor == Flavor::random_phase)
      for (int c = 0; c <= d; ++c) th[c] = phase(rng);
    double amod = prof.anchor == Anchor::lambda_inv_a ? mod * G.kmag(q) : mod;
    cd za = std::polar(amod, th[0]);
    st.a.data[q] = za;
    st.a.data[pq] = std::conj(za);
    for (int c = 0; c < d; ++c) {
      cd zm = std::polar(mod * share, th[c + 1]);
      st.v.data[c * n + q] = zm;
      st.v.data[c * n + pq] = std::conj(zm);
    }
  }
  return form == Form::momentum ? st : to_form(st, form);
}

// ---------------------------------------------------------------------------
// fitting

RateFit fit_rate(std::span<const double> t, std::span<const double> y, double t_lo, double t_hi) {
  if (t.size() != y.size()) throw std::invalid_argument("fit_rate: t and y differ in length");
  if (!(t_hi > t_lo) || t_lo < 0.0) throw std::invalid_argument("fit_rate: degenerate window");
  std::vector<double> xs, zs;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) continue;
    xs.push_back(std::log1p(t[i]));
    zs.push_back(std::log(y[i]));
  }
  const std::size_t n = xs.size();
  if (n < 12) {
    std::ostringstream os;
    os << "fit_rate: degenerate window, " << n << " usable samples in [" << t_lo << ", " << t_hi
       << "] (need 12)";
    throw std::invalid_argument(os.str());
  }
  double xm = 0.0, zm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += xs[i];
    zm += zs[i];
  }
  xm /= n;
  zm /= n;
  double sxx = 0.0, sxz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - xm) * (xs[i] - xm);
    sxz += (xs[i] - xm) * (zs[i] - zm);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_rate: degenerate window");
  double slope = sxz / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = zs[i] - zm - slope * (xs[i] - xm);
    rss += r * r;
  }
  RateFit f;
  f.exponent = -slope;
  f.halfwidth = 2.0 * std::sqrt(rss / (n - 2) / sxx);
  f.residual_rms = std::sqrt(rss / n);
  f.samples = (int)n;
  f.t_lo = t_lo;
  f.t_hi = t_hi;
  return f;
}

void upper_envelope(std::span<const double> t, std::span<const double> y, double window,
                    double t_lo, double t_hi, std::vector<double>& te, std::vector<double>& ye) {
  te.clear();
  ye.clear();
  if (!(window > 0.0)) throw std::invalid_argument("envelope window must be positive");
  long nw = (long)std::floor((t_hi - t_lo) / window + 1e-9);
  if (nw < 1) return;
  double start = t_hi - nw * window;
  std::size_t i = 0;
  for (long w = 0; w < nw; ++w) {
    double lo = start + w * window, hi = lo + window;
    double best = -1.0, bt = 0.0;
    for (; i < t.size() && t[i] < hi + (w + 1 == nw ? 1e-9 : 0.0); ++i) {
      if (t[i] < lo) continue;
      if (y[i] > best) {
        best = y[i];
        bt = t[i];
      }
    }
    if (best >= 0.0) {
      te.push_back(bt);
      ye.push_back(best);
    }
  }
}

// ---------------------------------------------------------------------------
// functionals

LyapunovTracker::LyapunovTracker(GridPtr g, int j0, double p, double M)
    : g_(std::move(g)), j0_(j0), p_(p), M_(M) {
  if (!(M >= 1.0)) throw std::invalid_argument("time weight M must be >= 1");
  j_min_ = block_table(g_).range().j_min;
  const double dp = g_->dim() / p;
  // X terms, then the D pairs (each pair occupies two tracks)
  tracks_ = {
      {dp - 2.0, false, false, {}, {}}, {dp, false, false, {}, {}},
      {dp, true, false, {}, {}},        {dp - 1.0, false, false, {}, {}},
      {dp + 1.0, true, false, {}, {}},
      {dp + 1.0, false, true, {}, {}},  {dp + 1.0, false, true, {}, {}},
      {dp + 3.0, true, true, {}, {}},   {dp + 3.0, true, true, {}, {}},
      {dp - 1.0, false, true, {}, {}},  {dp - 1.0, false, true, {}, {}},
      {dp, true, true, {}, {}},         {dp, true, true, {}, {}},
  };
}

void LyapunovTracker::update(Track& tr, const std::vector<double>& b, double t, double dt) {
  const double w = tr.weighted ? std::pow(t, M_) : 1.0;
  if (tr.acc.empty()) {
    tr.acc.assign(b.size(), 0.0);
    tr.prev.assign(b.size(), 0.0);
  }
  for (std::size_t k = 0; k < b.size(); ++k) {
    double v = w * b[k];
    if (tr.integral) {
      if (!first_) tr.acc[k] += 0.5 * dt * (tr.prev[k] + v);
      tr.prev[k] = v;
    } else {
      tr.acc[k] = std::max(tr.acc[k], v);
    }
  }
}

double LyapunovTracker::value(const Track& tr) const {
  return tr.acc.empty() ? 0.0 : besov_from_blocks(tr.acc, j_min_, tr.s, 1.0);
}

void LyapunovTracker::observe(double t, const SpectralField& a, const SpectralField& u) {
  if (!first_ && !(t > t_prev_)) throw std::invalid_argument("lyapunov times must increase");
  const double dt = first_ ? 0.0 : t - t_prev_;
  auto bn = [&](const SpectralField& f, Part part, double lam) {
    return block_norms(f, p_, NormOptions{part, j0_, lam});
  };
  auto a_lo = bn(a, Part::low, 0.0), a_hi = bn(a, Part::high, 0.0), a_all = bn(a, Part::whole, 0.0);
  auto u_all = bn(u, Part::whole, 0.0);
  auto ia_lo = bn(a, Part::low, -1.0), u_lo = bn(u, Part::low, 0.0);
  auto La_hi = bn(a, Part::high, 1.0), u_hi = bn(u, Part::high, 0.0);
  auto Lu_hi = bn(u, Part::high, 1.0);
  const std::vector<double>* src[13] = {&a_lo, &a_hi, &a_all, &u_all, &u_all, &ia_lo, &u_lo,
                                        &ia_lo, &u_lo, &La_hi, &u_hi, &a_hi, &Lu_hi};
  for (int k = 0; k < 13; ++k) update(tracks_[k], *src[k], t, dt);
  first_ = false;
  t_prev_ = t;

  LyapunovSample s;
  s.t = t;
  for (int k = 0; k < 5; ++k) {
    s.X_terms[k] = value(tracks_[k]);
    s.X += s.X_terms[k];
  }
  for (int k = 0; k < 4; ++k) {
    s.D_terms[k] = value(tracks_[5 + 2 * k]) + value(tracks_[6 + 2 * k]);
    s.D += s.D_terms[k];
  }
  samples_.push_back(s);
}

double LyapunovTracker::X() const {
  if (samples_.empty()) throw std::invalid_argument("lyapunov functional of an empty trajectory");
  return samples_.back().X;
}

double LyapunovTracker::D() const {
  if (samples_.empty()) throw std::invalid_argument("lyapunov functional of an empty trajectory");
  return samples_.back().D;
}

// ---------------------------------------------------------------------------
// reports

void write_report_csv_header(std::ostream& os) {
  os << "quantity,p,sigma,sigma1,fitted,halfwidth,predicted,gap,t_lo,t_hi,box_valid_until,kappa,"
        "seed\n";
}

void write_report_csv(std::ostream& os, const std::vector<DecayReport>& rows) {
  os.precision(10);
  for (const auto& r : rows)
    os << to_string(r.quantity) << ',' << r.p << ',' << r.sigma << ',' << r.sigma1 << ','
       << r.fitted << ',' << r.halfwidth << ',' << r.predicted << ',' << r.gap << ',' << r.t_lo
       << ',' << r.t_hi << ',' << r.box_valid_until << ',' << r.kappa << ',' << r.seed << '\n';
}

namespace {

struct Recorder {
  const DecaySetup& setup;
  DecayRun& out;
  LyapunovTracker* lyap;
  int j0;
  double s1;

  void operator()(const CnspState& s) {
    const double p = setup.profile.p;
    SpectralField m = momentum_of(s);
    SpectralField u = velocity_of(s);
    const SpectralField& a = s.a;
    out.t.push_back(s.t);
    out.density.push(s.t, block_norms(a, p));
    out.momentum.push(s.t, block_norms(m, p));
    out.velocity.push(s.t, block_norms(u, p));
    out.mass.push_back(a.data[0].real());
    const int jm = out.density.j_min;
    double low = besov_from_blocks(block_norms(a, p, {Part::low, j0, -1.0}), jm, s1, inf) +
                 besov_from_blocks(block_norms(m, p, {Part::low, j0, 0.0}), jm, s1, inf);
    out.low_sigma1.push_back(low);
    PhysicalField ap = inverse(a);
    out.max_density_dev = std::max(out.max_density_dev, kernels::max_abs(ap.data));
    if (p == 2.0) {
      out.lp_density.push_back(l2_norm_spectral(a));
      out.lp_velocity.push_back(l2_norm_spectral(u));
    } else {
      out.lp_density.push_back(lp_norm_physical(ap, p));
      out.lp_velocity.push_back(lp_norm_physical(inverse(u), p));
    }
    if (lyap) lyap->observe(s.t, a, u);
  }
};

DecayReport fit_row(const DecaySetup& setup, Quantity q, double sigma, double s1,
                    const std::vector<double>& t, const std::vector<double>& y, double tv) {
  const double kappa = setup.model.lin.kappa;
  const double window = kappa > 0.0 ? 2.0 * M_PI / std::sqrt(kappa) : 2.0 * M_PI;
  const double t_lo = tv / 10.0, t_hi = std::min(tv, t.back());
  std::vector<double> te, ye;
  upper_envelope(t, y, window, t_lo, t_hi, te, ye);
  DecayReport r;
  r.quantity = q;
  r.p = setup.profile.p;
  r.sigma = sigma;
  r.sigma1 = s1;
  r.box_valid_until = tv;
  r.kappa = kappa;
  r.seed = setup.profile.seed;
  r.t_lo = t_lo;
  r.t_hi = t_hi;
  try {
    r.predicted = predicted_exponent(q, sigma, s1, setup.dim, setup.profile.p);
  } catch (const std::domain_error&) {
    r.predicted = std::numeric_limits<double>::quiet_NaN();
  }
  auto f = fit_rate(te, ye, t_lo, t_hi);
  r.fitted = f.exponent;
  r.halfwidth = f.halfwidth;
  r.residual_rms = f.residual_rms;
  r.samples = f.samples;
  return r;
}

void fill_gaps(std::vector<DecayReport>& rows) {
  for (auto& r : rows) {
    double dens = NAN, vel = NAN;
    for (const auto& o : rows) {
      if (o.sigma != r.sigma) continue;
      if (o.quantity == Quantity::density) dens = o.fitted;
      if (o.quantity == Quantity::velocity) vel = o.fitted;
    }
    r.gap = dens - vel;
  }
}

} // namespace

DecayRun decay_experiment(const DecaySetup& setup, const DecayObserver& extra) {
  setup.model.validate();
  GridPtr g = make_grid(setup.dim, setup.n, setup.box_length);
  DecayRun out;
  out.box_valid_until = box_valid_until(*g, setup.alpha);
  const double t_end = setup.t_end > 0.0 ? setup.t_end : out.box_valid_until;
  const long nsamp = std::lround(t_end / setup.sample_dt);
  if (nsamp < 1 || std::fabs(nsamp * setup.sample_dt - t_end) > 1e-9 * t_end)
    throw std::invalid_argument("t_end must be a positive multiple of the sample interval");

  const double s1 = setup.profile.theorem_sigma1();
  const int jm = block_table(g).range().j_min;
  for (NormSeries* ns : {&out.density, &out.momentum, &out.velocity}) {
    ns->p = setup.profile.p;
    ns->j_min = jm;
  }
  std::unique_ptr<LyapunovTracker> lyap;
  if (setup.track_lyapunov)
    lyap = std::make_unique<LyapunovTracker>(g, setup.j0, setup.profile.p, setup.lyapunov_M);
  Recorder rec{setup, out, lyap.get(), setup.j0, s1};
  auto observe = [&](const CnspState& s) {
    rec(s);
    if (extra) extra(s);
  };

  CnspState st = synth_initial(setup.profile, g, setup.j0, Form::momentum);
  if (!setup.nonlinear) {
    // at linear order m and u obey the same equations
    auto tab = propagator_table(*g, setup.sample_dt, setup.model.lin);
    const std::size_t n = g->size();
    std::vector<cd> x(n * tab.m);
    std::copy(st.a.data.begin(), st.a.data.end(), x.begin());
    std::copy(st.v.data.begin(), st.v.data.end(), x.begin() + n);
    try {
      observe(st);
      for (long k = 1; k <= nsamp; ++k) {
        kernels::apply_mode_matrices(tab.m, tab.mats, x);
        std::copy(x.begin(), x.begin() + n, st.a.data.begin());
        std::copy(x.begin() + n, x.end(), st.v.data.begin());
        st.t = k * setup.sample_dt;
        observe(st);
      }
    } catch (const NumericalAbort& e) {
      out.aborted = true;
      out.reason = e.what();
    }
    out.final_state = st;
  } else {
    Stepper stepper(g, setup.model, setup.stepper);
    const long every = std::lround(setup.sample_dt / setup.stepper.dt);
    if (every < 1 || std::fabs(every * setup.stepper.dt - setup.sample_dt) > 1e-9)
      throw std::invalid_argument("sample interval must be a multiple of the step");
    auto res = run(to_form(st, setup.form), stepper, t_end, every, observe);
    out.aborted = res.aborted;
    out.reason = res.reason;
    out.final_state = res.state;
  }
  if (lyap) out.lyapunov = lyap->samples();
  if (out.aborted || out.t.empty()) return out;

  try {
  for (double sigma : setup.sigmas) {
    std::vector<double> yd(out.t.size()), ym(out.t.size()), yv(out.t.size());
    for (std::size_t k = 0; k < out.t.size(); ++k) {
      yd[k] = besov_from_blocks(out.density.blocks[k], jm, sigma, setup.summability);
      ym[k] = besov_from_blocks(out.momentum.blocks[k], jm, sigma, setup.summability);
      yv[k] = besov_from_blocks(out.velocity.blocks[k], jm, sigma, setup.summability);
    }
    out.besov.push_back(fit_row(setup, Quantity::density, sigma, s1, out.t, yd, out.box_valid_until));
    out.besov.push_back(fit_row(setup, Quantity::momentum, sigma, s1, out.t, ym, out.box_valid_until));
    out.besov.push_back(fit_row(setup, Quantity::velocity, sigma, s1, out.t, yv, out.box_valid_until));
  }
  fill_gaps(out.besov);
  out.lebesgue.push_back(
      fit_row(setup, Quantity::density, 0.0, s1, out.t, out.lp_density, out.box_valid_until));
  out.lebesgue.push_back(
      fit_row(setup, Quantity::velocity, 0.0, s1, out.t, out.lp_velocity, out.box_valid_until));
  fill_gaps(out.lebesgue);
  } catch (const std::invalid_argument& e) {
    out.besov.clear();
    out.lebesgue.clear();
    out.fit_error = e.what();
  }
  return out;
}

} // namespace cnsp
