#include "cnsp/solver.hpp"
#include "cnsp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cnsp {

Form parse_form(const std::string& s) {
  if (s == "velocity") return Form::velocity;
  if (s == "momentum") return Form::momentum;
  throw std::invalid_argument("unknown form '" + s + "' (velocity|momentum)");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "etd1") return Scheme::etd1;
  if (s == "etd2rk") return Scheme::etd2rk;
  throw std::invalid_argument("unknown scheme '" + s + "' (etd1|etd2rk)");
}

void StepperConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(cfl_target > 0.0)) throw std::invalid_argument("cfl_target must be positive");
}

namespace {

std::vector<double> to_phys(const Grid& g, std::span<const cd> z) {
  std::vector<cd> buf(z.begin(), z.end());
  fft_inverse(g, buf);
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = buf[i].real();
  return out;
}

void to_spec(const Grid& g, const std::vector<double>& f, std::span<cd> out) {
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f[i];
  fft_forward(g, out);
}

SpectralField masked(const SpectralField& f, bool dealias) {
  return dealias ? cnsp::dealias(f) : f;
}

// (Abar w)^ = -mu1 |k|^2 w - (mu1 + mu2) k (k.w)
void apply_abar(const Grid& g, const ModelParams& prm, const SpectralField& w, SpectralField& out) {
  const int d = g.dim();
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    double k[3], k2 = 0.0;
    cd kw = 0.0;
    for (int a = 0; a < d; ++a) {
      k[a] = g.kd(i, a);
      k2 += k[a] * k[a];
      kw += k[a] * w.data[a * n + i];
    }
    for (int a = 0; a < d; ++a)
      out.data[a * n + i] = -prm.mu1_bar * k2 * w.data[a * n + i] - (prm.mu1_bar + prm.mu2_bar) * k[a] * kw;
  }
}

void check_density(const std::vector<double>& a, double& min_density) {
  double mn = *std::min_element(a.begin(), a.end());
  min_density = 1.0 + mn;
  if (!std::isfinite(mn)) throw NumericalAbort("non-finite density");
  if (min_density <= 0.05) {
    std::ostringstream os;
    os << "vacuum guard: min(1+a) = " << min_density << " <= 0.05";
    throw NumericalAbort(os.str());
  }
}

// symmetric gradient and divergence of a vector field given in spectral space, physical output
void deformation(const Grid& g, const SpectralField& w, std::vector<std::vector<double>>& D,
                 std::vector<double>& divw) {
  const int d = g.dim();
  const std::size_t n = g.size();
  D.assign(d * d, {});
  divw.assign(n, 0.0);
  std::vector<std::vector<double>> grad(d * d);
  for (int i = 0; i < d; ++i)
    for (int l = 0; l < d; ++l) {
      std::vector<cd> z(n);
      for (std::size_t q = 0; q < n; ++q) z[q] = cd(0.0, g.kd(q, l)) * w.data[i * n + q];
      grad[i * d + l] = to_phys(g, z);
    }
  for (int i = 0; i < d; ++i)
    for (int l = 0; l < d; ++l) {
      D[i * d + l].resize(n);
      for (std::size_t q = 0; q < n; ++q)
        D[i * d + l][q] = 0.5 * (grad[i * d + l][q] + grad[l * d + i][q]);
    }
  for (int i = 0; i < d; ++i)
    for (std::size_t q = 0; q < n; ++q) divw[q] += grad[i * d + i][q];
}

} // namespace

SpectralField tensor_divergence(const SpectralField& T) {
  const Grid& g = *T.grid;
  const int d = g.dim();
  if (T.rank != d * d) throw std::invalid_argument("tensor_divergence expects a d x d tensor");
  const std::size_t n = g.size();
  SpectralField out(T.grid, d);
  for (int i = 0; i < d; ++i)
    for (int l = 0; l < d; ++l)
      for (std::size_t q = 0; q < n; ++q)
        out.data[i * n + q] += cd(0.0, g.kd(q, l)) * T.data[(i * d + l) * n + q];
  return out;
}

namespace {

NonlinearTerms velocity_rhs(const Model& model, const SpectralField& a0, const SpectralField& u0,
                            bool dealias, bool divergence_part) {
  const Grid& g = *a0.grid;
  const int d = g.dim();
  const std::size_t n = g.size();
  const ModelParams& prm = model.lin;
  SpectralField a = masked(a0, dealias), u = masked(u0, dealias);
  NonlinearTerms out;

  auto ap = to_phys(g, a.comp(0));
  check_density(ap, out.min_density);
  std::vector<std::vector<double>> up(d), gap(d), gup(d * d), aup(d);
  for (int i = 0; i < d; ++i) up[i] = to_phys(g, u.comp(i));
  {
    auto ga = gradient(a);
    for (int i = 0; i < d; ++i) gap[i] = to_phys(g, ga.comp(i));
  }
  for (int i = 0; i < d; ++i)
    for (int l = 0; l < d; ++l) {
      std::vector<cd> z(n);
      for (std::size_t q = 0; q < n; ++q) z[q] = cd(0.0, g.kd(q, l)) * u.data[i * n + q];
      gup[i * d + l] = to_phys(g, z);
    }
  {
    SpectralField Au(u.grid, d);
    apply_abar(g, prm, u, Au);
    for (int i = 0; i < d; ++i) aup[i] = to_phys(g, Au.comp(i));
  }

  double vmax = 0.0;
  std::vector<double> Q(n), G(n);
  for (std::size_t q = 0; q < n; ++q) {
    Q[q] = composite_value(Composite::Q, ap[q], model);
    G[q] = composite_value(Composite::G, ap[q], model);
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += up[i][q] * up[i][q];
    vmax = std::max(vmax, std::sqrt(s));
  }
  out.max_speed = vmax;

  std::vector<std::vector<double>> gp(d, std::vector<double>(n));
  for (int i = 0; i < d; ++i)
    for (std::size_t q = 0; q < n; ++q) {
      double adv = 0.0;
      for (int l = 0; l < d; ++l) adv += up[l][q] * gup[i * d + l][q];
      gp[i][q] = -adv + G[q] * gap[i][q] + Q[q] * aup[i][q];
    }

  if (!model.constant_viscosity()) {
    std::vector<std::vector<double>> D;
    std::vector<double> divu;
    deformation(g, u, D, divu);
    SpectralField T(u.grid, d * d);
    for (int i = 0; i < d; ++i)
      for (int l = 0; l < d; ++l) {
        std::vector<double> f(n);
        for (std::size_t q = 0; q < n; ++q) {
          double m1 = composite_value(Composite::mu1_tilde, ap[q], model);
          double m2 = composite_value(Composite::mu2_tilde, ap[q], model);
          f[q] = 2.0 * m1 * D[i * d + l][q] + (i == l ? m2 * divu[q] : 0.0);
        }
        to_spec(g, f, T.comp(i * d + l));
      }
    auto dv = tensor_divergence(T);
    for (int i = 0; i < d; ++i) {
      auto f = to_phys(g, dv.comp(i));
      for (std::size_t q = 0; q < n; ++q) gp[i][q] += (1.0 + Q[q]) * f[q];
    }
  }

  out.fv = SpectralField(u.grid, d);
  for (int i = 0; i < d; ++i) to_spec(g, gp[i], out.fv.comp(i));

  out.fa = SpectralField(a.grid, 1);
  if (divergence_part) {
    SpectralField au(a.grid, d);
    for (int i = 0; i < d; ++i) {
      std::vector<double> f(n);
      for (std::size_t q = 0; q < n; ++q) f[q] = ap[q] * up[i][q];
      to_spec(g, f, au.comp(i));
    }
    out.fa = divergence(au);
    for (auto& z : out.fa.data) z = -z;
  }
  if (dealias) {
    dealias_inplace(out.fa);
    dealias_inplace(out.fv);
  }
  return out;
}

struct MomentumTensor {
  SpectralField T;
  double max_speed = 0.0;
  double min_density = 1.0;
};

MomentumTensor momentum_tensor(const Model& model, const SpectralField& a0, const SpectralField& m0,
                               bool dealias) {
  const Grid& g = *a0.grid;
  const int d = g.dim();
  const std::size_t n = g.size();
  const ModelParams& prm = model.lin;
  SpectralField a = masked(a0, dealias), m = masked(m0, dealias);
  MomentumTensor out;

  auto ap = to_phys(g, a.comp(0));
  check_density(ap, out.min_density);
  std::vector<std::vector<double>> mp(d), psi(d), up(d);
  for (int i = 0; i < d; ++i) mp[i] = to_phys(g, m.comp(i));
  // psi = grad Lambda^{-2} a
  for (int i = 0; i < d; ++i) {
    std::vector<cd> z(n);
    for (std::size_t q = 0; q < n; ++q) {
      double k2 = g.k2(q);
      z[q] = k2 == 0.0 ? cd(0.0) : cd(0.0, g.kd(q, i)) * a.data[q] / k2;
    }
    psi[i] = to_phys(g, z);
  }

  std::vector<double> Q(n), H(n);
  double vmax = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    Q[q] = composite_value(Composite::Q, ap[q], model);
    H[q] = composite_value(Composite::H, ap[q], model);
  }
  for (int i = 0; i < d; ++i) {
    up[i].resize(n);
    for (std::size_t q = 0; q < n; ++q) up[i][q] = (1.0 + Q[q]) * mp[i][q];
  }
  for (std::size_t q = 0; q < n; ++q) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += up[i][q] * up[i][q];
    vmax = std::max(vmax, std::sqrt(s));
  }
  out.max_speed = vmax;

  // w = Q(a) m enters through the viscous stress of u = m + w
  SpectralField w(a.grid, d);
  for (int i = 0; i < d; ++i) {
    std::vector<double> f(n);
    for (std::size_t q = 0; q < n; ++q) f[q] = Q[q] * mp[i][q];
    to_spec(g, f, w.comp(i));
  }

  std::vector<std::vector<double>> Dm, Dw;
  std::vector<double> divm, divw;
  if (!model.constant_viscosity()) {
    deformation(g, m, Dm, divm);
    deformation(g, w, Dw, divw);
  }

  out.T = SpectralField(a.grid, d * d);
  const double kap = prm.kappa;
  for (int i = 0; i < d; ++i)
    for (int l = i; l < d; ++l) {
      std::vector<double> f(n);
      for (std::size_t q = 0; q < n; ++q) {
        double v = -mp[i][q] * up[l][q] + kap * psi[i][q] * psi[l][q];
        if (i == l) {
          double p2 = 0.0;
          for (int c = 0; c < d; ++c) p2 += psi[c][q] * psi[c][q];
          v += -H[q] - 0.5 * kap * p2;
        }
        if (!model.constant_viscosity()) {
          double rho = 1.0 + ap[q];
          double m1t = composite_value(Composite::mu1_tilde, ap[q], model);
          double m2t = composite_value(Composite::mu2_tilde, ap[q], model);
          v += 2.0 * m1t * Dm[i * d + l][q] + 2.0 * model.mu1(rho) * Dw[i * d + l][q];
          if (i == l) v += m2t * divm[q] + model.mu2(rho) * divw[q];
        }
        f[q] = v;
      }
      to_spec(g, f, out.T.comp(i * d + l));
      if (l != i)
        std::copy(out.T.comp(i * d + l).begin(), out.T.comp(i * d + l).end(),
                  out.T.comp(l * d + i).begin());
    }

  if (model.constant_viscosity()) {
    // 2 mu1 D(w) + mu2 div(w) Id, assembled in spectral space
    for (int i = 0; i < d; ++i)
      for (int l = 0; l < d; ++l)
        for (std::size_t q = 0; q < n; ++q) {
          cd v = prm.mu1_bar * (cd(0.0, g.kd(q, l)) * w.data[i * n + q] +
                                cd(0.0, g.kd(q, i)) * w.data[l * n + q]);
          if (i == l) {
            cd dw = 0.0;
            for (int c = 0; c < d; ++c) dw += cd(0.0, g.kd(q, c)) * w.data[c * n + q];
            v += prm.mu2_bar * dw;
          }
          out.T.data[(i * d + l) * n + q] += v;
        }
  }
  if (dealias) dealias_inplace(out.T);
  return out;
}

} // namespace

SpectralField nonlinear_g(const Model& model, const SpectralField& a, const SpectralField& u,
                          bool dealias) {
  return velocity_rhs(model, a, u, dealias, false).fv;
}

SpectralField nonlinear_N(const Model& model, const SpectralField& a, const SpectralField& m,
                          bool dealias) {
  return momentum_tensor(model, a, m, dealias).T;
}

NonlinearTerms nonlinear_rhs(const Model& model, Form form, const SpectralField& a,
                             const SpectralField& v, bool dealias) {
  if (form == Form::velocity) return velocity_rhs(model, a, v, dealias, true);
  auto mt = momentum_tensor(model, a, v, dealias);
  NonlinearTerms out;
  out.fa = SpectralField(a.grid, 1);
  out.fv = tensor_divergence(mt.T);
  out.max_speed = mt.max_speed;
  out.min_density = mt.min_density;
  return out;
}

void plain_generator(std::span<const double> k, const ModelParams& prm, cd* out) {
  const int d = (int)k.size(), m = d + 1;
  double k2 = 0.0;
  for (double x : k) k2 += x * x;
  for (int q = 0; q < m * m; ++q) out[q] = 0.0;
  const cd I(0.0, 1.0);
  const double cr = k2 == 0.0 ? 0.0 : prm.c(k2) / k2;
  for (int i = 0; i < d; ++i) {
    out[i + 1] = -I * k[i];
    out[(i + 1) * m] = -I * cr * k[i];
    for (int l = 0; l < d; ++l)
      out[(i + 1) * m + l + 1] = (i == l ? -prm.mu1_bar * k2 : 0.0) - (prm.mu1_bar + prm.mu2_bar) * k[i] * k[l];
  }
}

Stepper::Stepper(GridPtr grid, const Model& model, const StepperConfig& cfg)
    : grid_(std::move(grid)), model_(model), cfg_(cfg) {
  model_.validate();
  cfg_.validate();
  const Grid& g = *grid_;
  const int d = g.dim();
  m_ = d + 1;
  auto tab = propagator_table(g, cfg_.dt, model_.lin);
  E_ = std::move(tab.mats);
  if (!cfg_.nonlinear) return;
  const std::size_t mm = (std::size_t)m_ * m_;
  phi1_.assign(g.size() * mm, 0.0);
  phi2_.assign(g.size() * mm, 0.0);
  const std::ptrdiff_t n = g.size();
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t q = 0; q < n; ++q) {
    double k[3];
    for (int a = 0; a < d; ++a) k[a] = g.k(q, a);
    cd L[16];
    plain_generator({k, (std::size_t)d}, model_.lin, L);
    CMat A(m_, m_);
    for (int r = 0; r < m_; ++r)
      for (int c = 0; c < m_; ++c) A(r, c) = cfg_.dt * L[r * m_ + c];
    auto ph = phi_functions(A);
    for (int r = 0; r < m_; ++r)
      for (int c = 0; c < m_; ++c) {
        phi1_[q * mm + r * m_ + c] = ph.phi1(r, c);
        phi2_[q * mm + r * m_ + c] = ph.phi2(r, c);
      }
  }
}

namespace {

std::vector<cd> pack(const SpectralField& a, const SpectralField& v) {
  std::vector<cd> x(a.data.size() + v.data.size());
  std::copy(a.data.begin(), a.data.end(), x.begin());
  std::copy(v.data.begin(), v.data.end(), x.begin() + a.data.size());
  return x;
}

void unpack(const std::vector<cd>& x, SpectralField& a, SpectralField& v) {
  std::copy(x.begin(), x.begin() + a.data.size(), a.data.begin());
  std::copy(x.begin() + a.data.size(), x.end(), v.data.begin());
}

// x += s * M y, mode by mode
void add_matvec(int m, const std::vector<cd>& M, const std::vector<cd>& y, double s,
                std::vector<cd>& x) {
  const std::size_t n = x.size() / m;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < (std::ptrdiff_t)n; ++q) {
    const cd* A = M.data() + q * m * m;
    for (int r = 0; r < m; ++r) {
      cd acc = 0.0;
      for (int c = 0; c < m; ++c) acc += A[r * m + c] * y[c * n + q];
      x[r * n + q] += s * acc;
    }
  }
}

} // namespace

void Stepper::step(CnspState& s) const {
  if (s.a.grid.get() != grid_.get() && (s.a.grid->n() != grid_->n() || s.a.grid->dim() != grid_->dim()))
    throw std::invalid_argument("state and stepper grids differ");
  const double dt = cfg_.dt;
  auto x = pack(s.a, s.v);
  if (!cfg_.nonlinear) {
    kernels::apply_mode_matrices(m_, E_, x);
    unpack(x, s.a, s.v);
    s.t += dt;
    return;
  }

  auto nl0 = nonlinear_rhs(model_, s.form, s.a, s.v, cfg_.dealias);
  const double cfl = dt * nl0.max_speed * k_max();
  if (cfl > cfg_.cfl_target) {
    double sugg = 0.9 * cfg_.cfl_target / (nl0.max_speed * k_max());
    std::ostringstream os;
    os << "CFL violation: dt*max|u|*k_max = " << cfl << " > " << cfg_.cfl_target
       << "; try dt <= " << sugg;
    throw CflViolation(os.str(), sugg);
  }
  auto n0 = pack(nl0.fa, nl0.fv);
  kernels::apply_mode_matrices(m_, E_, x);
  add_matvec(m_, phi1_, n0, dt, x);
  if (cfg_.scheme == Scheme::etd2rk) {
    SpectralField a1 = s.a, v1 = s.v;
    unpack(x, a1, v1);
    auto nl1 = nonlinear_rhs(model_, s.form, a1, v1, cfg_.dealias);
    auto n1 = pack(nl1.fa, nl1.fv);
    for (std::size_t q = 0; q < n1.size(); ++q) n1[q] -= n0[q];
    add_matvec(m_, phi2_, n1, dt, x);
  }
  for (const auto& z : x)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw NumericalAbort("NaN in state");
  unpack(x, s.a, s.v);
  s.t += dt;
}

SpectralField velocity_of(const CnspState& s) {
  if (s.form == Form::velocity) return s.v;
  const Grid& g = *s.a.grid;
  auto ap = to_phys(g, s.a.comp(0));
  double min_density;
  check_density(ap, min_density);
  SpectralField u(s.v.grid, s.v.rank);
  for (int i = 0; i < s.v.rank; ++i) {
    auto mp = to_phys(g, s.v.comp(i));
    for (std::size_t q = 0; q < g.size(); ++q) mp[q] /= (1.0 + ap[q]);
    to_spec(g, mp, u.comp(i));
  }
  return u;
}

SpectralField momentum_of(const CnspState& s) {
  if (s.form == Form::momentum) return s.v;
  const Grid& g = *s.a.grid;
  auto ap = to_phys(g, s.a.comp(0));
  SpectralField m(s.v.grid, s.v.rank);
  for (int i = 0; i < s.v.rank; ++i) {
    auto up = to_phys(g, s.v.comp(i));
    for (std::size_t q = 0; q < g.size(); ++q) up[q] *= (1.0 + ap[q]);
    to_spec(g, up, m.comp(i));
  }
  return m;
}

CnspState to_form(const CnspState& s, Form target) {
  CnspState out = s;
  out.form = target;
  out.v = target == Form::velocity ? velocity_of(s) : momentum_of(s);
  return out;
}

SpectralField effective_velocity(const ModelParams& prm, const SpectralField& a,
                                 const SpectralField& u) {
  const Grid& g = *a.grid;
  const int d = g.dim();
  const std::size_t n = g.size();
  SpectralField w = project_compressible(u);
  const double inv_mu = 1.0 / prm.mu_bar();
  for (std::size_t q = 0; q < n; ++q) {
    double k2 = g.k2(q);
    if (k2 == 0.0) continue;
    cd s = (prm.gamma + prm.kappa / k2) * a.data[q] / k2 * inv_mu;
    for (int i = 0; i < d; ++i) w.data[i * n + q] += cd(0.0, g.k(q, i)) * s;
  }
  return w;
}

RunResult run(const CnspState& init, const Stepper& stepper, double t_end, long observe_every,
              const Observer& obs) {
  const double dt = stepper.config().dt;
  const long steps = std::lround(t_end / dt);
  if (steps < 0 || std::fabs(steps * dt - t_end) > 1e-9 * std::max(1.0, t_end))
    throw std::invalid_argument("t_end must be a multiple of dt");
  RunResult res;
  res.state = init;
  res.last_healthy = init;
  if (obs) obs(res.state);
  const double t0 = init.t;
  for (long k = 1; k <= steps; ++k) {
    try {
      stepper.step(res.state);
      res.state.t = t0 + k * dt;
    } catch (const NumericalAbort& e) {
      res.aborted = true;
      res.reason = e.what();
      res.state = res.last_healthy;
      return res;
    }
    res.steps = k;
    res.last_healthy = res.state;
    if (obs && observe_every > 0 && (k % observe_every == 0 || k == steps)) obs(res.state);
  }
  return res;
}

} // namespace cnsp
