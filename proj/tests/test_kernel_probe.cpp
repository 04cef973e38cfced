#include "cnsp/kernel_probe.hpp"

#include <doctest.h>

#include <cmath>

using namespace cnsp;

namespace {

std::vector<KernelSample> synthetic(int j, double c, double rate, int points, double tau_max) {
  std::vector<KernelSample> p;
  for (int k = 0; k < points; ++k) {
    KernelSample s;
    s.j = j;
    s.tau = tau_max * k / (points - 1);
    s.t = s.tau * std::ldexp(1.0, -2 * j);
    s.value = c * std::exp(-rate * s.tau);
    p.push_back(s);
  }
  return p;
}

} // namespace

TEST_CASE("representative entries") {
  auto e2 = representative_entries(2);
  CHECK(std::find(e2.begin(), e2.end(), std::make_pair(0, 0)) != e2.end());
  for (auto [r, c] : representative_entries(3)) {
    CHECK(r >= 0);
    CHECK(r <= 3);
    CHECK(c >= 0);
    CHECK(c <= 3);
  }
}

TEST_CASE("kernel size at t = 0 does not depend on j") {
  ModelParams prm;
  std::vector<double> t0{0.0};
  KernelProbeOptions opt;
  opt.radius = 16.0;
  auto a = kernel_l1_profile(-3, t0, 2, prm, opt);
  auto b = kernel_l1_profile(-5, t0, 2, prm, opt);
  REQUIRE(a.size() == 1);
  CHECK(a[0].value > 0.0);
  CHECK(a[0].value == doctest::Approx(b[0].value).epsilon(1e-9));
  CHECK_FALSE(a[0].truncated);
}

TEST_CASE("box limits are enforced") {
  ModelParams prm;
  KernelProbeOptions opt;
  opt.max_n = 64;
  std::vector<double> far{std::ldexp(200.0, 2 * 3)};
  CHECK_THROWS_AS(kernel_l1_profile(-3, far, 2, prm, opt), std::runtime_error);
  opt.allow_truncation = true;
  auto s = kernel_l1_profile(-3, far, 2, prm, opt);
  CHECK(s[0].truncated);
  CHECK(std::isnan(s[0].value));
}

TEST_CASE("bound fit on synthetic exponential profiles") {
  std::vector<std::vector<KernelSample>> prof;
  const double c[] = {1.0, 1.5, 2.0};
  for (int j = -3; j <= -1; ++j) prof.push_back(synthetic(j, c[j + 3], 1.0025, 33, 16.0));
  auto fit = fit_kernel_bound(prof, 3.0, 2.0);
  CHECK(fit.found);
  CHECK(fit.r0 == doctest::Approx(1.0));
  CHECK(fit.ratio == doctest::Approx(2.0).epsilon(1e-9));

  // a tighter ratio limit than the spread of the constants admits no r0
  auto none = fit_kernel_bound(prof, 1.5, 2.0);
  CHECK_FALSE(none.found);
}

TEST_CASE("truncated samples end the usable window") {
  std::vector<std::vector<KernelSample>> prof{synthetic(-2, 1.0, 0.5, 17, 16.0)};
  for (std::size_t k = 8; k < prof[0].size(); ++k) {
    prof[0][k].truncated = true;
    prof[0][k].value = std::nan("");
  }
  // the weight e^{0.5 tau} would make the later samples rise; only the first half counts
  std::vector<bool> rising;
  auto s = weighted_sups(prof, 0.4, &rising);
  CHECK(std::isfinite(s[0]));
  CHECK_FALSE(rising[0]);
  s = weighted_sups(prof, 0.6, &rising);
  CHECK(rising[0]);
}

TEST_CASE("log2 slope") {
  std::vector<int> js{-5, -4, -3, -2};
  std::vector<double> y;
  for (int j : js) y.push_back(3.0 * std::exp2(-0.5 * j));
  CHECK(log2_slope(js, y) == doctest::Approx(-0.5));
  CHECK_THROWS(log2_slope({1}, {1.0}));
}
