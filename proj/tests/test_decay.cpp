#include "cnsp/decay.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace cnsp;

namespace {

// 2^{j s} b_j over [jlo, jhi]: max / min
double flatness(const std::vector<double>& b, int j_min, double s, int jlo, int jhi) {
  double hi = 0.0, lo = INFINITY;
  for (int j = jlo; j <= jhi; ++j) {
    double v = std::exp2(j * s) * b[j - j_min];
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  return hi / lo;
}

std::vector<double> lambda_inv_blocks(const SpectralField& a) {
  return block_norms(a, 2.0, NormOptions{Part::whole, 0, -1.0});
}

} // namespace

TEST_CASE("white spectrum oracle: flat block profile at sigma = -d/2") {
  // all moduli equal, random phases: ||Delta_j a||_2 ~ 2^{jd/2}
  auto g = make_grid(2, 256, 64.0 * M_PI);
  SpectralField a(g, 1);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 2.0 * M_PI);
  for (std::size_t q = 1; q < g->size(); ++q) a.data[q] = std::polar(1.0, U(rng));
  a = forward(inverse(a));  // keep the real part: Hermitian symmetric
  auto br = block_range(*g);
  auto b = block_norms(a, 2.0);
  CHECK(flatness(b, br.j_min, -1.0, br.j_min + 1, br.j_max - 1) < 1.5);
  CHECK(flatness(lambda_inv_blocks(a), br.j_min, 0.0, br.j_min + 1, br.j_max - 1) < 1.5);
}

TEST_CASE("synthesized data hit the block targets") {
  auto g = make_grid(2, 256, 64.0 * M_PI);
  const int j0 = -1;
  auto br = block_range(*g);
  for (double s1 : {-1.0, -0.5}) {
    DecayProfile prof;
    prof.sigma1 = s1;
    auto st = synth_initial(prof, g, j0);
    auto la = lambda_inv_blocks(st.a), m = block_norms(st.v, 2.0);
    CHECK(flatness(la, br.j_min, s1, br.j_min, j0) < 1.5);
    CHECK(flatness(m, br.j_min, s1, br.j_min, j0) < 1.5);
    CHECK(la[j0 - br.j_min] == doctest::Approx(prof.amplitude * std::exp2(-j0 * s1)).epsilon(0.05));
    // nothing above j0 + 2
    for (int j = j0 + 3; j <= br.j_max; ++j) CHECK(la[j - br.j_min] < 1e-12 * la[0]);
  }

  DecayProfile pa;
  pa.anchor = Anchor::a;
  pa.sigma1 = -1.5;
  auto g3 = make_grid(3, 32, 32.0 * M_PI);
  auto br3 = block_range(*g3);
  auto st = synth_initial(pa, g3, j0);
  CHECK(flatness(block_norms(st.a, 2.0), br3.j_min, -1.5, br3.j_min, j0) < 1.5);
}

TEST_CASE("seeds change phases, not norms") {
  auto g = make_grid(2, 128, 32.0 * M_PI);
  DecayProfile p1, p2;
  p2.seed = 99;
  auto s1 = synth_initial(p1, g, -1), s2 = synth_initial(p2, g, -1);
  auto b1 = block_norms(s1.a, 2.0), b2 = block_norms(s2.a, 2.0);
  for (std::size_t k = 0; k < b1.size(); ++k)
    if (b1[k] > 1e-12) CHECK(b2[k] == doctest::Approx(b1[k]).epsilon(0.02));
  CHECK(s1.a.data != s2.a.data);

  DecayProfile zero;
  zero.amplitude = 0.0;
  auto z = synth_initial(zero, g, -1);
  bool all_zero = true;
  for (auto v : z.a.data) all_zero = all_zero && v == cd(0.0);
  for (auto v : z.v.data) all_zero = all_zero && v == cd(0.0);
  CHECK(all_zero);

  DecayProfile det;
  det.flavor = Flavor::deterministic_powerlaw;
  auto d1 = synth_initial(det, g, -1);
  det.seed = 5;
  CHECK(synth_initial(det, g, -1).a.data == d1.a.data);
}

TEST_CASE("profile admissibility") {
  DecayProfile p;
  p.sigma1 = 0.5;  // d/p - 1 = 0 in 2D
  CHECK_THROWS_AS(p.validate(2), std::invalid_argument);
  p.sigma1 = -2.5;  // below sigma0 - 1 = -2
  CHECK_THROWS_AS(p.validate(2), std::invalid_argument);
  p.sigma1 = -1.0;
  CHECK_NOTHROW(p.validate(2));
  CHECK(sigma0(2, 2.0) == -1.0);
  CHECK(sigma0(3, 1.0) == 0.0);
  CHECK(sigma0(3, 2.0) == -1.5);
}

TEST_CASE("predicted exponents") {
  CHECK(predicted_exponent(Quantity::density, 0.0, -2.0, 2, 2.0) == 1.5);
  CHECK(predicted_exponent(Quantity::velocity, 0.0, -1.0, 3, 1.0) == 0.5);
  CHECK(predicted_exponent(Quantity::density, 0.0, -1.5, 3, 2.0) == 1.25);
  // a-anchored L^1-type data in 3D: theorem index sigma1 + 1
  DecayProfile pa;
  pa.anchor = Anchor::a;
  pa.sigma1 = -1.5;
  CHECK(predicted_exponent(Quantity::density, 0.0, pa.theorem_sigma1(), 3, 2.0) == 0.75);
  CHECK(predicted_exponent(Quantity::velocity, 0.0, pa.theorem_sigma1(), 3, 2.0) == 0.25);

  for (double s : {-0.5, 0.0, 0.5, 1.0}) {
    double e0 = predicted_exponent(Quantity::density, s, -1.0, 2, 2.0);
    double e1 = predicted_exponent(Quantity::density, s - 0.25, -1.0, 2, 2.0);
    CHECK(e0 - e1 == doctest::Approx(0.125));
    CHECK(e0 - predicted_exponent(Quantity::momentum, s, -1.0, 2, 2.0) == doctest::Approx(0.5));
  }
  try {
    predicted_exponent(Quantity::density, 1.5, -1.0, 2, 2.0);
    FAIL("expected domain_error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("sigma <= d/p") != std::string::npos);
  }
  CHECK_THROWS_AS(predicted_exponent(Quantity::momentum, -1.0, -1.0, 2, 2.0), std::domain_error);
}

TEST_CASE("rate fits") {
  std::vector<double> t, y, c;
  for (int k = 0; k < 200; ++k) {
    double tt = 25.6 + (256.0 - 25.6) * k / 199.0;
    t.push_back(tt);
    y.push_back(3.0 * std::pow(1.0 + tt, -0.75));
    c.push_back(2.0);
  }
  auto f = fit_rate(t, y, 25.6, 256.0);
  CHECK(f.exponent == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(f.samples == 200);
  CHECK(std::fabs(fit_rate(t, c, 0.0, 300.0).exponent) < 1e-12);
  CHECK_THROWS_AS(fit_rate(t, y, 25.6, 30.0), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate(t, y, 40.0, 30.0), std::invalid_argument);

  // 5% multiplicative noise, 100 seeds
  int inside = 0;
  double mean = 0.0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 0.05);
    std::vector<double> yn(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) yn[k] = y[k] * (1.0 + N(rng));
    auto fn = fit_rate(t, yn, 25.6, 256.0);
    mean += fn.exponent / 100.0;
    if (std::fabs(fn.exponent - 0.75) <= 0.05) ++inside;
    CHECK(fn.halfwidth <= 0.05);
  }
  CHECK(inside == 100);
  CHECK(mean == doctest::Approx(0.75).epsilon(0.01));
}

TEST_CASE("upper envelope of an oscillating decay") {
  std::vector<double> t, y;
  for (int k = 0; k <= 4000; ++k) {
    double tt = 0.05 * k;
    t.push_back(tt);
    y.push_back(std::pow(1.0 + tt, -0.5) * (1.0 + 0.5 * std::cos(tt)));
  }
  std::vector<double> te, ye;
  upper_envelope(t, y, 2.0 * M_PI, 20.0, 200.0, te, ye);
  CHECK(te.size() >= 12);
  auto f = fit_rate(te, ye, 20.0, 200.0);
  CHECK(f.exponent == doctest::Approx(0.5).epsilon(0.04));
  auto raw = fit_rate(t, y, 20.0, 200.0);
  CHECK(raw.halfwidth > f.halfwidth);
}

TEST_CASE("Lyapunov functionals") {
  auto g = make_grid(2, 64, 16.0 * M_PI);
  const int j0 = -1;
  SUBCASE("zero state") {
    LyapunovTracker lt(g, j0, 2.0);
    SpectralField a(g, 1), u(g, 2);
    lt.observe(0.0, a, u);
    lt.observe(1.0, a, u);
    CHECK(lt.X() == 0.0);
    CHECK(lt.D() == 0.0);
  }
  SUBCASE("constant fields on [0, 1] with M = 1") {
    DecayProfile prof;
    prof.amplitude = 1.0;
    auto st = synth_initial(prof, g, 1);
    auto u = velocity_of(st);
    LyapunovTracker lt(g, j0, 2.0, 1.0);
    for (int k = 0; k <= 10; ++k) lt.observe(0.1 * k, st.a, u);
    const int jm = block_table(g).range().j_min;
    auto B = [&](const SpectralField& f, Part part, double lam, double s) {
      return besov_from_blocks(block_norms(f, 2.0, NormOptions{part, j0, lam}), jm, s, 1.0);
    };
    const double dp = 1.0;
    double X = B(st.a, Part::low, 0, dp - 2) + B(st.a, Part::high, 0, dp) + B(st.a, Part::whole, 0, dp) +
               B(u, Part::whole, 0, dp - 1) + B(u, Part::whole, 0, dp + 1);
    double D = B(st.a, Part::low, -1, dp + 1) + B(u, Part::low, 0, dp + 1) +
               0.5 * (B(st.a, Part::low, -1, dp + 3) + B(u, Part::low, 0, dp + 3)) +
               B(st.a, Part::high, 1, dp - 1) + B(u, Part::high, 0, dp - 1) +
               0.5 * (B(st.a, Part::high, 0, dp) + B(u, Part::high, 1, dp));
    CHECK(lt.X() == doctest::Approx(X).epsilon(1e-12));
    CHECK(lt.D() == doctest::Approx(D).epsilon(1e-12));
    CHECK_THROWS(lt.observe(0.5, st.a, u));
  }
}

TEST_CASE("linear decay run: monotone functional, propagation, rate ordering in sigma") {
  DecaySetup s;
  s.n = 64;
  s.box_length = 64.0 * M_PI;
  s.sigmas = {-0.5, 0.0, 0.5};
  auto run = decay_experiment(s);
  REQUIRE_FALSE(run.aborted);
  REQUIRE(run.fit_error.empty());
  CHECK(run.box_valid_until == doctest::Approx(256.0));

  // X is a sum of running maxima and integrals: non-decreasing, and it levels off
  const auto& L = run.lyapunov;
  bool mono = true;
  for (std::size_t k = 1; k < L.size(); ++k) mono = mono && L[k].X >= L[k - 1].X;
  CHECK(mono);
  CHECK(L.back().X <= 3.0 * L.front().X);

  double low_max = *std::max_element(run.low_sigma1.begin(), run.low_sigma1.end());
  CHECK(low_max <= 2.0 * run.low_sigma1.front());
  double drift = 0.0;
  for (double mval : run.mass) drift = std::max(drift, std::fabs(mval));
  CHECK(drift < 1e-15);

  auto exps = [&](Quantity q) {
    std::vector<double> e;
    for (const auto& r : run.besov)
      if (r.quantity == q) e.push_back(r.fitted);
    return e;
  };
  for (Quantity q : {Quantity::density, Quantity::momentum, Quantity::velocity}) {
    auto e = exps(q);
    REQUIRE(e.size() == 3);
    CHECK(e[0] < e[1]);
    CHECK(e[1] < e[2]);
  }
  auto ed = exps(Quantity::density);
  CHECK((ed[2] - ed[0]) / 1.0 == doctest::Approx(0.5).epsilon(0.2));

  std::ostringstream os;
  write_report_csv_header(os);
  CHECK(os.str() == "quantity,p,sigma,sigma1,fitted,halfwidth,predicted,gap,t_lo,t_hi,box_valid_until,kappa,seed\n");
  write_report_csv(os, run.besov);
  const std::string csv = os.str();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + (long)run.besov.size());
}
