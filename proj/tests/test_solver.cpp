#include "cnsp/decay.hpp"
#include "cnsp/experiments.hpp"
#include "cnsp/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cnsp;

namespace {

std::vector<double> phys(const SpectralField& f, int c) {
  SpectralField one(f.grid, 1);
  std::copy(f.comp(c).begin(), f.comp(c).end(), one.data.begin());
  return inverse(one).data;
}

SpectralField spec(GridPtr g, const std::vector<std::vector<double>>& comps) {
  PhysicalField p(g, (int)comps.size());
  for (std::size_t c = 0; c < comps.size(); ++c)
    std::copy(comps[c].begin(), comps[c].end(), p.data.begin() + c * g->size());
  return forward(p);
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

double l2(const SpectralField& f) { return l2_norm_spectral(f); }

SpectralField sub(const SpectralField& a, const SpectralField& b) {
  SpectralField out = a;
  for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

// A u = mu1 Lap u + (mu1 + mu2) grad div u, spectral
SpectralField lame(const ModelParams& prm, const SpectralField& u) {
  const Grid& g = *u.grid;
  const int d = g.dim();
  const std::size_t n = g.size();
  SpectralField out(u.grid, d);
  for (std::size_t q = 0; q < n; ++q) {
    cd kdotu = 0.0;
    for (int l = 0; l < d; ++l) kdotu += g.kd(q, l) * u.data[l * n + q];
    for (int i = 0; i < d; ++i)
      out.data[i * n + q] = -prm.mu1_bar * g.k2(q) * u.data[i * n + q] -
                            (prm.mu1_bar + prm.mu2_bar) * g.kd(q, i) * kdotu;
  }
  return out;
}

Model default_model() { return Model{}; }

} // namespace

TEST_CASE("composites") {
  Model m;
  CHECK(composite_value(Composite::Q, 0.1, m) == doctest::Approx(-0.0909090909090909).epsilon(1e-14));
  for (double a : {-0.9, -0.3, 0.0, 0.2, 0.95}) {
    double q = composite_value(Composite::Q, a, m);
    CHECK(std::fabs(q * (1.0 + a) + a) < 1e-15);
    // linear pressure: G = gamma a / (1+a), H = 0
    CHECK(composite_value(Composite::G, a, m) == doctest::Approx(a / (1.0 + a)).epsilon(1e-13));
    CHECK(std::fabs(composite_value(Composite::H, a, m)) < 1e-15);
    CHECK(composite_value(Composite::mu1_tilde, a, m) == 0.0);
  }
  Model quad;
  quad.pressure_exponent = 2.0;
  quad.viscosity_exponent = 1.0;
  CHECK(composite_value(Composite::G, 0.3, quad) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(composite_value(Composite::H, 0.3, quad) == doctest::Approx(0.045));
  CHECK(composite_value(Composite::mu1_tilde, 0.3, quad) == doctest::Approx(0.3));

  auto g = make_grid(1, 8, 1.0);
  PhysicalField a(g, 1);
  CHECK(composite(Composite::Q, a, m).data == std::vector<double>(8, 0.0));
  a.data[3] = 1.0;
  CHECK_THROWS_AS(composite(Composite::Q, a, m), std::domain_error);
}

TEST_CASE("velocity-form nonlinearity: Taylor-Green advection") {
  auto g = make_grid(2, 32, 2.0 * M_PI);
  const std::size_t n = g->size();
  std::vector<double> ux(n), uy(n), zero(n, 0.0), gx(n), gy(n);
  for (std::size_t q = 0; q < n; ++q) {
    double x = g->x(q, 0), y = g->x(q, 1);
    ux[q] = std::sin(x) * std::cos(y);
    uy[q] = -std::cos(x) * std::sin(y);
    gx[q] = -0.5 * std::sin(2.0 * x);
    gy[q] = -0.5 * std::sin(2.0 * y);
  }
  auto G = nonlinear_g(default_model(), spec(g, {zero}), spec(g, {ux, uy}), true);
  CHECK(max_diff(G, spec(g, {gx, gy})) < 1e-14);
}

TEST_CASE("velocity-form nonlinearity against a direct evaluation") {
  // constant viscosity: g = -u.grad u + G(a) grad a + Q(a) A u
  auto g = make_grid(2, 32, 4.0 * M_PI);
  const std::size_t n = g->size();
  Model model;
  model.lin.mu2_bar = 0.3;
  model.pressure_exponent = 1.4;
  std::vector<double> a(n), ux(n), uy(n);
  for (std::size_t q = 0; q < n; ++q) {
    double x = g->x(q, 0), y = g->x(q, 1);
    a[q] = 0.2 * std::cos(0.5 * x) + 0.1 * std::sin(x + 0.5 * y);
    ux[q] = 0.3 * std::sin(0.5 * y) + 0.1 * std::cos(x);
    uy[q] = 0.2 * std::cos(0.5 * x + y);
  }
  auto A = spec(g, {a}), U = spec(g, {ux, uy});
  auto got = nonlinear_g(model, A, U, false);

  auto gu0 = gradient([&] { SpectralField s(g, 1); std::copy(U.comp(0).begin(), U.comp(0).end(), s.data.begin()); return s; }());
  auto gu1 = gradient([&] { SpectralField s(g, 1); std::copy(U.comp(1).begin(), U.comp(1).end(), s.data.begin()); return s; }());
  auto ga = gradient(A);
  auto Au = lame(model.lin, U);
  std::vector<double> du[2][2] = {{phys(gu0, 0), phys(gu0, 1)}, {phys(gu1, 0), phys(gu1, 1)}};
  std::vector<double> gap[2] = {phys(ga, 0), phys(ga, 1)};
  std::vector<double> aup[2] = {phys(Au, 0), phys(Au, 1)};
  std::vector<double> u[2] = {ux, uy};
  std::vector<std::vector<double>> ref(2, std::vector<double>(n));
  for (int i = 0; i < 2; ++i)
    for (std::size_t q = 0; q < n; ++q) {
      double rho = 1.0 + a[q];
      double G = 1.0 - std::pow(rho, 0.4) / rho;  // gamma - P'(rho)/rho with P' = rho^{e-1}
      double Q = 1.0 / rho - 1.0;
      ref[i][q] = -(u[0][q] * du[i][0][q] + u[1][q] * du[i][1][q]) + G * gap[i][q] + Q * aup[i][q];
    }
  CHECK(max_diff(got, spec(g, ref)) < 1e-12);
}

TEST_CASE("momentum-form tensor with m = 0 reduces to pressure and field terms") {
  // a = eps cos(kx): div N = eps^2 sin(2kx) (kappa/(2k) + gamma k/2) along x for P = gamma(rho^2-1)/2
  auto g = make_grid(2, 32, 8.0 * M_PI);
  const std::size_t n = g->size();
  Model model;
  model.pressure_exponent = 2.0;
  const double eps = 0.1, k = 0.5;
  std::vector<double> a(n), ex(n), zero(n, 0.0);
  for (std::size_t q = 0; q < n; ++q) {
    double x = g->x(q, 0);
    a[q] = eps * std::cos(k * x);
    ex[q] = eps * eps * std::sin(2.0 * k * x) * (0.5 / k + 0.5 * k);
  }
  auto N = nonlinear_N(model, spec(g, {a}), spec(g, {zero, zero}), false);
  auto divN = tensor_divergence(N);
  CHECK(max_diff(divN, spec(g, {ex, zero})) < 1e-14);
}

TEST_CASE("momentum-form tensor is quadratic") {
  auto g = make_grid(2, 32, 8.0 * M_PI);
  auto base = smooth_state(g, 1.0, Form::velocity);
  std::vector<double> norms;
  const double eps[] = {1e-2, 1e-3, 1e-4};
  for (double e : eps) {
    SpectralField a = base.a, m = base.v;
    for (auto& z : a.data) z *= e;
    for (auto& z : m.data) z *= e;
    norms.push_back(l2(nonlinear_N(default_model(), a, m, true)));
  }
  double s = std::log(norms[0] / norms[2]) / std::log(eps[0] / eps[2]);
  CHECK(s == doctest::Approx(2.0).epsilon(0.01));
  SpectralField za(g, 1), zm(g, 2);
  CHECK(l2(nonlinear_N(default_model(), za, zm, true)) == 0.0);
}

TEST_CASE("linear stepping is the exact semigroup") {
  auto g = make_grid(2, 16, 8.0 * M_PI);
  auto s = smooth_state(g, 0.1, Form::velocity);
  StepperConfig sc;
  sc.dt = 0.3;
  sc.nonlinear = false;
  Stepper st(g, default_model(), sc);
  auto stepped = s;
  for (int k = 0; k < 5; ++k) st.step(stepped);
  auto a = s.a, u = s.v;
  apply_semigroup(1.5, a, u, default_model().lin);
  CHECK(max_diff(stepped.a, a) < 1e-13);
  CHECK(max_diff(stepped.v, u) < 1e-13);
}

TEST_CASE("ETD2RK converges at second order") {
  auto g = make_grid(2, 32, 2.0 * M_PI);
  auto cr = etd_self_convergence(g, default_model(), Scheme::etd2rk, 1e-3, 0.25, 1.0);
  CHECK(cr.order == doctest::Approx(2.0).epsilon(0.1));
  auto c1 = etd_self_convergence(g, default_model(), Scheme::etd1, 1e-3, 0.25, 1.0);
  CHECK(c1.order == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("mass and momentum conservation") {
  auto g = make_grid(2, 16, 2.0 * M_PI);
  auto s = smooth_state(g, 0.05, Form::momentum);
  StepperConfig sc;
  sc.dt = 0.01;
  Stepper st(g, default_model(), sc);
  const cd mass0 = s.a.data[0];
  const cd mom0[2] = {s.v.data[0], s.v.data[g->size()]};
  auto res = run(s, st, 10.0, 0, {});
  REQUIRE_FALSE(res.aborted);
  CHECK(res.steps == 1000);
  CHECK(std::abs(res.state.a.data[0] - mass0) < 1e-14);
  CHECK(std::abs(res.state.v.data[0] - mom0[0]) < 1e-12);
  CHECK(std::abs(res.state.v.data[g->size()] - mom0[1]) < 1e-12);
}

TEST_CASE("momentum and velocity forms agree") {
  auto g = make_grid(2, 32, 8.0 * M_PI);
  DecayProfile prof;
  auto sm = synth_initial(prof, g, -1, Form::momentum);
  auto sv = to_form(sm, Form::velocity);
  StepperConfig sc;
  sc.dt = 1e-2;
  Stepper st(g, default_model(), sc);
  auto rm = run(sm, st, 1.0, 0, {}), rv = run(sv, st, 1.0, 0, {});
  auto mv = to_form(rv.state, Form::momentum);
  CHECK(l2(sub(rm.state.a, mv.a)) <= 1e-5 * l2(rm.state.a));
  CHECK(l2(sub(rm.state.v, mv.v)) <= 1e-5 * l2(rm.state.v));
}

TEST_CASE("tiny data follow the linear flow") {
  auto g = make_grid(2, 32, 8.0 * M_PI);
  auto s = smooth_state(g, 1e-6, Form::velocity);
  StepperConfig sc;
  sc.dt = 0.1;
  Stepper st(g, default_model(), sc);
  auto res = run(s, st, 10.0, 0, {});
  auto a = s.a, u = s.v;
  apply_semigroup(10.0, a, u, default_model().lin);
  CHECK(l2(sub(res.state.a, a)) < 1e-4 * l2(a));
  CHECK(l2(sub(res.state.v, u)) < 1e-4 * l2(u));
}

TEST_CASE("run edge cases and guards") {
  auto g = make_grid(2, 16, 2.0 * M_PI);
  auto s = smooth_state(g, 0.01, Form::velocity);
  StepperConfig sc;
  sc.dt = 0.1;
  Stepper st(g, default_model(), sc);
  int calls = 0;
  auto r0 = run(s, st, 0.0, 1, [&](const CnspState&) { ++calls; });
  CHECK(calls == 1);
  CHECK(r0.steps == 0);
  CHECK(r0.state.a.data == s.a.data);
  CHECK_THROWS_AS(run(s, st, 0.25, 0, {}), std::invalid_argument);

  // near-vacuum data abort and hand back the last healthy state
  auto bad = smooth_state(g, 0.7, Form::velocity);
  auto rb = run(bad, st, 1.0, 0, {});
  CHECK(rb.aborted);
  CHECK(rb.reason.find("vacuum") != std::string::npos);
  CHECK(rb.state.a.data == bad.a.data);

  // fast flow on a fine grid violates the CFL bound
  auto fine = make_grid(2, 64, 2.0 * M_PI);
  auto fast = smooth_state(fine, 0.3, Form::velocity);
  sc.dt = 1.0;
  Stepper big(fine, default_model(), sc);
  auto rc = run(fast, big, 1.0, 0, {});
  CHECK(rc.aborted);
  CHECK(rc.reason.find("CFL") != std::string::npos);
}

TEST_CASE("effective velocity") {
  ModelParams prm;
  auto g = make_grid(2, 16, 8.0 * M_PI);
  const std::size_t n = g->size();
  SpectralField a(g, 1), u(g, 2);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N(0.0, 1.0);
  for (auto& z : u.data) z = {N(rng), N(rng)};
  auto w = effective_velocity(prm, a, u);
  CHECK(max_diff(w, project_compressible(u)) == 0.0);

  SpectralField zu(g, 2);
  for (auto& z : a.data) z = {N(rng), N(rng)};
  w = effective_velocity(prm, a, zu);
  double e = 0.0;
  for (std::size_t q = 1; q < n; ++q) {
    double k2 = g->k2(q);
    for (int i = 0; i < 2; ++i) {
      cd want = cd(0.0, g->k(q, i)) / k2 * (1.0 + 1.0 / k2) * a.data[q] / prm.mu_bar();
      e = std::max(e, std::abs(w.data[i * n + q] - want) / std::max(1.0, std::abs(want)));
    }
  }
  CHECK(e < 1e-14);
}

TEST_CASE("damped density equation along the linear flow") {
  // d_t a + (gamma/mu_bar) a + (kappa/mu_bar) Lambda^{-2} a + div w = 0
  ModelParams prm;
  auto g = make_grid(2, 16, 8.0 * M_PI);
  const std::size_t n = g->size();
  auto s = smooth_state(g, 1.0, Form::velocity);
  const double h = 1e-4;
  double worst = 0.0;
  for (double t : {0.5, 2.0, 7.0}) {
    auto at = [&](double tt) {
      auto a = s.a, u = s.v;
      apply_semigroup(tt, a, u, prm);
      return std::make_pair(a, u);
    };
    auto [a, u] = at(t);
    auto ap = at(t + h).first, am = at(t - h).first;
    auto divw = divergence(effective_velocity(prm, a, u));
    for (std::size_t q = 1; q < n; ++q) {
      double k2 = g->k2(q);
      cd dadt = (ap.data[q] - am.data[q]) / (2.0 * h);
      cd res = dadt + (prm.gamma + prm.kappa / k2) / prm.mu_bar() * a.data[q] + divw.data[q];
      worst = std::max(worst, std::abs(res));
    }
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("moderate data keep the energy functional bounded") {
  auto g = make_grid(2, 32, 8.0 * M_PI);
  DecayProfile prof;
  prof.amplitude = 0.05;
  auto s = synth_initial(prof, g, -1, Form::momentum);
  StepperConfig sc;
  sc.dt = 0.05;
  Stepper st(g, default_model(), sc);
  LyapunovTracker lt(g, -1, 2.0);
  double max_a = 0.0;
  auto res = run(s, st, 50.0, 5, [&](const CnspState& x) {
    auto u = velocity_of(x);
    lt.observe(x.t, x.a, u);
    auto ap = inverse(x.a);
    for (double v : ap.data) max_a = std::max(max_a, std::fabs(v));
  });
  REQUIRE_FALSE(res.aborted);
  const auto& smp = lt.samples();
  CHECK(smp.back().X <= 3.0 * smp.front().X);
  CHECK(max_a > 1e-3);
}
