// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "cascade/weights.hpp"
#include "test_support.hpp"

using namespace cascade;

TEST_CASE("time-age envelope values") {
  CHECK(theta(0.5, 1.0, 1.0) == doctest::Approx(256.0).epsilon(1e-14));
  CHECK(theta(0.5, 0.5, 1.0) == doctest::Approx(4096.0).epsilon(1e-14));
  // symmetric in t about T/2
  for (double t : {0.1, 0.23, 0.4}) {
    CHECK(theta(t, 0.7, 1.0) == doctest::Approx(theta(1.0 - t, 0.7, 1.0)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(theta(0.0, 0.5, 1.0), Error);
  CHECK_THROWS_AS(theta(1.0, 0.5, 1.0), Error);
  CHECK_THROWS_AS(theta(0.5, 0.0, 1.0), Error);
  CHECK(log_theta(0.5, 1.0, 1.0) == doctest::Approx(std::log(256.0)).epsilon(1e-13));
}

TEST_CASE("sigma construction: symmetric window forces the plain parabola") {
  GridSpec g{100, 100, 40, 0.4, 1.0};
  const auto sig = build_sigma({0.4, 0.6}, g);
  CHECK(sig.b == 0.0);
  CHECK(sig.critical_point == doctest::Approx(0.5));
  CHECK(sig.sigma_inf == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(sig.value(0.0) == 0.0);
  CHECK(sig.value(1.0) == 0.0);
}

TEST_CASE("sigma construction: off-center window") {
  GridSpec g{100, 100, 40, 0.4, 1.0};
  const auto sig = build_sigma({0.55, 0.75}, g);
  CHECK(std::abs(sig.deriv(0.65)) < 1e-9);
  // slope changes sign exactly once, across the critical point
  int changes = 0;
  double prev = sig.deriv(1e-4);
  for (int k = 1; k <= 10000; ++k) {
    const double x = static_cast<double>(k) / 10001.0;
    const double d = sig.deriv(x);
    if (prev * d < 0.0) {
      ++changes;
      CHECK(std::abs(x - 0.65) < 2e-4);
    }
    prev = d;
  }
  CHECK(changes == 1);
  for (int j = 0; j <= 100; ++j) {
    const double x = j / 100.0;
    if (x > 0.0 && x < 1.0) CHECK(sig.value(x) > 0.0);
  }
}

TEST_CASE("psi closed forms") {
  DispersionSpec unit;
  unit.kind = DispersionSpec::Kind::constant;
  unit.c = 1.0;
  unit.gamma = 0.0;
  CHECK(psi(1.0, 1.0, 1.0, unit) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(psi(0.0, 3.0, 2.0, unit) == doctest::Approx(-6.0).epsilon(1e-14));

  DispersionSpec pw;
  pw.kind = DispersionSpec::Kind::power;
  pw.alpha = 0.6;
  pw.gamma = 0.6;
  // closed-form drift vs direct graded quadrature
  const double lam = 2.0, d = 4.0;
  for (double x : {0.2, 0.5, 1.0}) {
    double acc = 0.0;
    const int M = 200000;
    double rp = 0.0, fp = 0.0;
    for (int m = 1; m <= M; ++m) {
      const double fr = static_cast<double>(m) / M;
      const double r = x * fr * fr;
      const double f = r / std::pow(r, 0.6);
      acc += 0.5 * (f + fp) * (r - rp);
      rp = r;
      fp = f;
    }
    const double want = lam * (acc - d);
    CHECK(std::abs(psi(x, lam, d, pw) - want) < 1e-8 * std::abs(want));
  }
}

TEST_CASE("combined weights at a node") {
  auto cfg = testsup::desk_config();
  WeightParams wp = default_weight_params(cfg);
  // kappa saturates the lower bound, so e^{kappa sigma_inf} = 16
  CHECK(wp.kappa * wp.sigma.sigma_inf == doctest::Approx(4.0 * std::log(2.0)));
  const auto w = weights_at(0.2, 0.5, wp.sigma.critical_point, wp, cfg.k1, cfg.k2,
                            cfg.time_horizon);
  CHECK(w.Psi == doctest::Approx(16.0 - 256.0).epsilon(1e-12));
  CHECK(w.phi1 < 0.0);
  CHECK(w.phi2 < 0.0);
  CHECK(w.Phi < 0.0);
  CHECK(w.small_phi > 0.0);
  CHECK(w.phi2 <= w.Phi);
  // Psi(0) = 1 - e^{2 kappa ||sigma||}
  const auto w0 = weights_at(0.2, 0.5, 0.0, wp, cfg.k1, cfg.k2, cfg.time_horizon);
  CHECK(w0.Psi == doctest::Approx(1.0 - 256.0).epsilon(1e-12));
}

TEST_CASE("lambda2 admissible interval: worked example") {
  DispersionSpec unit;
  unit.kind = DispersionSpec::Kind::constant;
  unit.c = 1.0;
  unit.gamma = 0.0;
  // d2 = 5, kappa ||sigma|| = 4 ln 2, k2(1) = 1, gamma = 0
  const auto iv = lambda2_interval(5.0, 4.0 * std::log(2.0), 1.0, unit, 0.0);
  CHECK(iv.hypotheses_met);
  CHECK(iv.lo == doctest::Approx(2.0 * 255.0 / 9.0).epsilon(1e-12));
  CHECK(iv.hi == doctest::Approx(64.0).epsilon(1e-12));
  CHECK(iv.lo < iv.hi);

  // hi scales like 1/d2
  const auto iv2 = lambda2_interval(10.0, 4.0 * std::log(2.0), 1.0, unit, 0.0);
  CHECK(iv2.hi == doctest::Approx(0.5 * iv.hi).epsilon(1e-12));

  // kappa below the bound: no nonemptiness assertion
  const auto weak = lambda2_interval(5.0, 2.0, 1.0, unit, 0.0);
  CHECK_FALSE(weak.hypotheses_met);
}

TEST_CASE("orderings hold on the default configuration") {
  const auto cfg = testsup::desk_config();
  const auto wp = default_weight_params(cfg);
  const auto rep = check_orderings(wp, cfg.k1, cfg.k2, cfg.grid);
  CHECK(rep.hypotheses_met);
  CHECK(rep.all_hold());
  CHECK(rep.margin_psi1_psi2 > 0.0);
  CHECK(rep.margin_psi2_Psi > 0.0);
  CHECK(rep.margin_four_thirds > 0.0);
}

TEST_CASE("ordering margins as lambda2 approaches the upper endpoint") {
  const auto cfg = testsup::desk_config();
  auto wp = default_weight_params(cfg);
  const auto iv = lambda2_interval(wp.d2, wp.kappa, wp.sigma.sigma_inf, cfg.k2,
                                   std::max(cfg.k1.gamma, cfg.k2.gamma));
  double prev_lower = 1e300;
  double prev_upper = -1e300;
  for (int k = 0; k <= 8; ++k) {
    wp.lambda2 = iv.lo + (iv.hi - iv.lo) * (0.05 + 0.9 * k / 8.0);
    const auto rep = check_orderings(wp, cfg.k1, cfg.k2, cfg.grid);
    // the lower-side margin psi2 - (4/3) Psi shrinks monotonically,
    // the upper-side margin Psi - psi2 grows
    CHECK(rep.margin_four_thirds < prev_lower);
    CHECK(rep.margin_psi2_Psi > prev_upper);
    prev_lower = rep.margin_four_thirds;
    prev_upper = rep.margin_psi2_Psi;
  }
}

TEST_CASE("lambda2 above the admissible interval is reported, not asserted") {
  const auto cfg = testsup::desk_config();
  auto wp = default_weight_params(cfg);
  const auto iv = lambda2_interval(wp.d2, wp.kappa, wp.sigma.sigma_inf, cfg.k2,
                                   std::max(cfg.k1.gamma, cfg.k2.gamma));
  wp.lambda2 = iv.hi * 1.5;
  const auto rep = check_orderings(wp, cfg.k1, cfg.k2, cfg.grid);
  CHECK_FALSE(rep.hypotheses_met);
}

TEST_CASE("weights evaluate without NaN next to the singular boundary") {
  const auto cfg = testsup::desk_config();
  const auto wp = default_weight_params(cfg);
  const GridSpec& g = cfg.grid;
  // first interior node in t and a: the envelope is astronomically large and
  // e^{2 s phi} underflows cleanly to zero
  const auto w = weights_at(g.dt(), g.da(), 0.5, wp, cfg.k1, cfg.k2, g.time_horizon);
  const double e1 = std::exp(2.0 * wp.s * w.phi1);
  const double e2 = std::exp(2.0 * wp.s * w.phi2);
  CHECK(e1 == 0.0);
  CHECK(e2 == 0.0);
  CHECK(std::isfinite(w.phi1));
  CHECK(clamped_exp(2.0 * wp.s * w.phi1) > 0.0);  // floored, not denormal noise
}

TEST_CASE("pure evaluation is bit-stable") {
  const auto cfg = testsup::desk_config();
  const auto wp = default_weight_params(cfg);
  const auto a = weights_at(0.13, 0.41, 0.37, wp, cfg.k1, cfg.k2, cfg.time_horizon);
  const auto b = weights_at(0.13, 0.41, 0.37, wp, cfg.k1, cfg.k2, cfg.time_horizon);
  CHECK(a.phi1 == b.phi1);
  CHECK(a.phi2 == b.phi2);
  CHECK(a.Phi == b.Phi);
  CHECK(a.small_phi == b.small_phi);
}
