#include "cnsp/semigroup.hpp"
#include "cnsp/solver.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

using namespace cnsp;

namespace {

// Independent reference: Eigen's own matrix exponential.
CMat eigen_exp(const CMat& A) { return A.exp(); }

std::vector<double> random_xi(std::mt19937_64& rng, int d, double r) {
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> xi(d);
  double n2 = 0.0;
  for (auto& x : xi) x = N(rng), n2 += x * x;
  for (auto& x : xi) x *= r / std::sqrt(n2);
  return xi;
}

double maxabs(const CMat& A) { return A.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("expm against an independent exponential") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int n : {2, 3, 4, 7}) {
    for (double scale : {1e-3, 1.0, 30.0}) {
      CMat A(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cd(N(rng), N(rng)) * scale / std::sqrt(n);
      CMat ref = eigen_exp(A);
      CHECK(maxabs(expm(A) - ref) <= 1e-11 * std::max(1.0, maxabs(ref)));
    }
  }
  // nilpotent: the series terminates
  CMat J = CMat::Zero(3, 3);
  J(0, 1) = 2.0;
  J(1, 2) = 3.0;
  CMat exact = CMat::Identity(3, 3) + J + 0.5 * J * J;
  CHECK(maxabs(expm(J) - exact) < 1e-14);
}

TEST_CASE("phi functions satisfy their defining identities") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N(0.0, 1.0);
  CMat A(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = cd(N(rng), N(rng));
  auto ph = phi_functions(A);
  CMat I = CMat::Identity(3, 3);
  CHECK(maxabs(ph.e - eigen_exp(A)) < 1e-12);
  CHECK(maxabs(A * ph.phi1 - (ph.e - I)) < 1e-12);
  CHECK(maxabs(A * A * ph.phi2 - (ph.e - I - A)) < 1e-12);
  auto z = phi_functions(CMat::Zero(2, 2));
  CHECK(maxabs(z.phi1 - 1.0 * CMat::Identity(2, 2)) < 1e-15);
  CHECK(maxabs(z.phi2 - 0.5 * CMat::Identity(2, 2)) < 1e-15);
}

TEST_CASE("eigenvalues and the critical frequency") {
  ModelParams prm;
  auto e0 = eigenvalues(0.0, prm);
  CHECK(std::abs(e0.plus - cd(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(e0.minus - cd(0.0, -1.0)) < 1e-15);

  const double x0 = critical_xi0(prm);
  const double mb = prm.mu_bar();
  double disc = std::pow(mb * x0 * x0, 2) - 4.0 * prm.c(x0 * x0);
  CHECK(std::fabs(disc) < 1e-12 * 4.0 * prm.c(x0 * x0));
  CHECK(x0 == doctest::Approx(1.27201964951).epsilon(1e-10));
  CHECK(default_j0(prm) == -1);
  CHECK(std::ldexp(1.0, default_j0(prm)) <= x0 / 2.0);

  // roots of the characteristic polynomial
  for (double r : {1e-3, 0.3, 1.0, x0, 2.0, 50.0}) {
    auto ev = eigenvalues(r, prm);
    for (cd l : {ev.plus, ev.minus}) {
      cd res = l * l + mb * r * r * l + prm.c(r * r);
      CHECK(std::abs(res) < 1e-10 * std::max(1.0, std::norm(l)));
    }
  }
}

TEST_CASE("stability dichotomy in kappa") {
  ModelParams stable;
  double worst = -1.0;
  for (int i = 0; i <= 4000; ++i) {
    double r = std::exp2(-12.0 + 20.0 * i / 4000.0);
    worst = std::max(worst, eigenvalues(r, stable).plus.real());
    worst = std::max(worst, eigenvalues(r, stable).minus.real());
  }
  CHECK(worst <= 0.0);

  ModelParams unstable;
  unstable.kappa = -1.0;
  bool found = false;
  for (int i = 0; i <= 400 && !found; ++i) {
    double r = std::exp2(-12.0 + 12.0 * i / 400.0);
    found = eigenvalues(r, unstable).plus.real() > 0.0 || eigenvalues(r, unstable).minus.real() > 0.0;
  }
  CHECK(found);
}

TEST_CASE("Green symbol against the independent exponential") {
  ModelParams prm;
  const double x0 = critical_xi0(prm);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 600; ++s) {
    const int d = 2 + s % 2;
    double r = s % 3 == 0 ? x0 * (0.95 + 0.1 * U(rng)) : std::pow(10.0, -3.0 + 6.0 * U(rng));
    if (s % 50 == 0) r = x0;
    double t = 10.0 * U(rng);
    auto xi = random_xi(rng, d, r);
    for (auto w : {Weighting::hweighted, Weighting::plain, Weighting::balanced}) {
      auto G = green_symbol(t, xi, prm, w);
      CMat ref = eigen_exp(t * generator(xi, prm, w));
      worst = std::max(worst, maxabs(G.matrix - ref));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("Green symbol structure") {
  ModelParams prm;
  std::mt19937_64 rng(4);
  auto xi = random_xi(rng, 3, 0.7);
  CHECK(maxabs(green_symbol(0.0, xi, prm).matrix - CMat::Identity(4, 4)) < 1e-14);
  std::vector<double> zero{0.0, 0.0};
  CHECK(maxabs(green_symbol(3.0, zero, prm).matrix - CMat::Identity(3, 3)) == 0.0);

  for (double r : {0.01, 0.5, critical_xi0(prm), 5.0}) {
    auto x = random_xi(rng, 2, r);
    CMat g = green_symbol(1.3 + 0.4, x, prm).matrix;
    CMat gg = green_symbol(1.3, x, prm).matrix * green_symbol(0.4, x, prm).matrix;
    CHECK(maxabs(g - gg) < 1e-12);

    CMat M = generator(x, prm);
    auto ev = eigenvalues(r, prm);
    cd tr = ev.plus + ev.minus - prm.mu1_bar * r * r;
    cd det = ev.plus * ev.minus * (-prm.mu1_bar * r * r);
    CHECK(std::abs(M.trace() - tr) < 1e-12 * std::max(1.0, std::abs(tr)));
    CHECK(std::abs(M.determinant() - det) < 1e-12 * std::max(1.0, std::abs(det)));
  }
}

TEST_CASE("plain propagator is the exponential of the plain generator") {
  ModelParams prm;
  prm.mu2_bar = 0.5;
  prm.kappa = 2.0;
  std::mt19937_64 rng(5);
  for (double r : {0.02, 0.4, 1.1, 3.0}) {
    auto xi = random_xi(rng, 3, r);
    CMat L(4, 4), P(4, 4);
    plain_generator(xi, prm, L.data());
    plain_propagator(2.5, xi, prm, P.data());
    // both buffers are row-major; compare transposed views consistently
    CMat Lr = L.transpose(), Pr = P.transpose();
    CHECK(maxabs(Pr - eigen_exp(2.5 * Lr)) < 1e-11);
  }
}

TEST_CASE("apply_semigroup on a grid") {
  ModelParams prm;
  auto g = make_grid(2, 16, 8.0 * M_PI);
  SpectralField a(g, 1), u(g, 2);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> N(0.0, 1.0);
  for (auto& z : a.data) z = {N(rng), N(rng)};
  for (auto& z : u.data) z = {N(rng), N(rng)};
  auto a0 = a, u0 = u;
  apply_semigroup(0.0, a, u, prm);
  CHECK(a.data == a0.data);
  CHECK(u.data == u0.data);

  auto a1 = a0, u1 = u0, a2 = a0, u2 = u0;
  apply_semigroup(1.5, a1, u1, prm);
  apply_semigroup(0.5, a2, u2, prm);
  apply_semigroup(1.0, a2, u2, prm);
  double e = 0.0;
  for (std::size_t i = 0; i < a1.data.size(); ++i) e = std::max(e, std::abs(a1.data[i] - a2.data[i]));
  for (std::size_t i = 0; i < u1.data.size(); ++i) e = std::max(e, std::abs(u1.data[i] - u2.data[i]));
  CHECK(e < 1e-12);
  CHECK_THROWS(apply_semigroup(-1.0, a, u, prm));
}

TEST_CASE("Klein-Gordon oscillation of a low mode") {
  ModelParams prm;
  const double r = 0.1;
  std::vector<double> xi{r, 0.0};
  const double mb = prm.mu_bar();
  const double B = std::sqrt(prm.c(r * r) - 0.25 * mb * mb * std::pow(r, 4));
  const double delta = 0.5 * mb * r * r;

  // density response to unit density data, sampled finely
  auto dens = [&](double t) {
    cd P[9];
    plain_propagator(t, xi, prm, P);
    return P[0].real();
  };
  std::vector<double> zeros;
  const double h = 1e-3;
  double prev = dens(0.0);
  for (int k = 1; k < 40000 && zeros.size() < 8; ++k) {
    double cur = dens(k * h);
    if ((prev > 0) != (cur > 0)) {
      double lo = (k - 1) * h, hi = k * h;
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        ((dens(lo) > 0) == (dens(mid) > 0) ? lo : hi) = mid;
      }
      zeros.push_back(0.5 * (lo + hi));
    }
    prev = cur;
  }
  REQUIRE(zeros.size() == 8);
  double freq = 0.5 * (zeros.size() - 1) / (zeros.back() - zeros.front());
  CHECK(freq == doctest::Approx(B / (2.0 * M_PI)).epsilon(0.02));

  // peaks one full period apart give the decay rate
  const double T = 2.0 * (zeros[2] - zeros[0]);
  double rate = -std::log(dens(3.0 * T) / dens(2.0 * T)) / T;
  CHECK(rate == doctest::Approx(delta).epsilon(0.05));
}
