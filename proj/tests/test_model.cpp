// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "cascade/config.hpp"
#include "test_support.hpp"

using namespace cascade;

TEST_CASE("trapezoid weights sum to the axis length") {
  GridSpec g{100, 50, 20, 0.4, 1.0};
  for (Axis ax : {Axis::x, Axis::a, Axis::t}) {
    const auto w = quadrature_weights(g, ax);
    double s = 0.0;
    for (double v : w) s += v;
    CHECK(s == doctest::Approx(g.axis_length(ax)).epsilon(1e-14));
  }
}

TEST_CASE("trapezoid rule: constants and affine integrands exact") {
  GridSpec g{100, 100, 40, 0.4, 1.0};
  const auto w = quadrature_weights(g, Axis::x);
  double c = 0.0, lin = 0.0, quad = 0.0;
  for (int j = 0; j <= g.n_x; ++j) {
    c += w[j];
    lin += w[j] * g.x_node(j);
    quad += w[j] * g.x_node(j) * g.x_node(j);
  }
  CHECK(c == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lin == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(quad - 1.0 / 3.0) < 1e-4);  // h^2/12 * max|f''| bound
}

TEST_CASE("default desk configuration passes every hypothesis") {
  const auto rep = validate(testsup::desk_config());
  for (const auto& c : rep.clauses) {
    INFO(c.clause, ": ", c.detail);
    CHECK(c.pass);
  }
  CHECK(rep.pass());
}

TEST_CASE("validate is pure and repeatable") {
  const auto cfg = testsup::desk_config();
  const auto a = validate(cfg);
  const auto b = validate(cfg);
  REQUIRE(a.clauses.size() == b.clauses.size());
  for (std::size_t i = 0; i < a.clauses.size(); ++i) {
    CHECK(a.clauses[i].clause == b.clauses[i].clause);
    CHECK(a.clauses[i].pass == b.clauses[i].pass);
  }
}

TEST_CASE("fertile newborns are rejected") {
  auto cfg = testsup::desk_config();
  cfg.rates.beta1 = {RateSpec::Kind::constant, 0.1};
  const auto rep = validate(cfg);
  CHECK_FALSE(rep.pass());
  const auto* c = rep.find("rates.beta1.newborns_infertile");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->pass);
}

TEST_CASE("time horizon must precede the age cutoff") {
  auto cfg = testsup::desk_config();
  cfg.time_horizon = 0.6;
  cfg.grid.time_horizon = 0.6;
  cfg.grid.n_t = 60;  // keep dt = da
  const auto rep = validate(cfg);
  CHECK_FALSE(rep.pass());
  const auto* c = rep.find("geometry.time_before_cutoff");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->pass);
}

TEST_CASE("power dispersion growth bound holds exactly at gamma = alpha") {
  auto cfg = testsup::desk_config();
  cfg.k1.alpha = 0.5;
  cfg.k1.gamma = 0.5;
  const auto rep = validate(cfg);
  const auto* c = rep.find("k1.growth");
  REQUIRE(c != nullptr);
  CHECK(c->pass);  // x k' = gamma k with equality
}

TEST_CASE("power dispersion growth bound fails for gamma below alpha") {
  auto cfg = testsup::desk_config();
  cfg.k1.alpha = 0.5;
  cfg.k1.gamma = 0.3;
  const auto rep = validate(cfg);
  const auto* c = rep.find("k1.growth");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->pass);
}

TEST_CASE("interaction lower bound on the inner window") {
  auto cfg = testsup::desk_config();
  cfg.rates.mu3 = {RateSpec::Kind::constant, 0.5};  // below nu = 1
  const auto rep = validate(cfg);
  const auto* c = rep.find("rates.mu3.lower_bound_on_omega1");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->pass);
}

TEST_CASE("negative rates are rejected") {
  auto cfg = testsup::desk_config();
  cfg.rates.mu2 = {RateSpec::Kind::constant, -0.1};
  const auto rep = validate(cfg);
  const auto* c = rep.find("rates.mu2.nonnegative");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->pass);
}

TEST_CASE("window nesting omega1 inside omega") {
  auto cfg = testsup::desk_config();
  cfg.omega1 = {0.35, 0.65};
  const auto rep = validate(cfg);
  const auto* c = rep.find("geometry.omega1_inside_omega");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->pass);
}

TEST_CASE("structural failures are distinct hard errors") {
  auto cfg = testsup::desk_config();
  cfg.omega = {0.7, 0.4};  // x1 >= x2
  const auto rep = validate(cfg);
  CHECK_FALSE(rep.structurally_sound());
  CHECK_FALSE(rep.pass());
  CHECK(rep.clauses.empty());  // hypothesis checks skipped
}

TEST_CASE("grid misalignment is a named clause") {
  auto cfg = testsup::desk_config();
  cfg.grid.n_t = 41;  // dt != da
  const auto rep = validate(cfg);
  const auto* c = rep.find("grid.characteristic_alignment");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->pass);
}

TEST_CASE("constant dispersion is flagged nondegenerate") {
  auto cfg = testsup::desk_config();
  cfg.k2.kind = DispersionSpec::Kind::constant;
  cfg.k2.c = 1.0;
  cfg.k2.gamma = 0.0;
  const auto rep = validate(cfg);
  const auto* c = rep.find("k2.vanishes_at_0");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->pass);
  CHECK(c->detail.find("nondegenerate") != std::string::npos);
}

TEST_CASE("grid structural gate") {
  GridSpec bad{4, 100, 40, 0.4, 1.0};
  CHECK_THROWS_AS(bad.require_valid(), Error);
  GridSpec misaligned{100, 100, 37, 0.4, 1.0};
  CHECK_THROWS_AS(misaligned.require_valid(), Error);
}

TEST_CASE("power drift integral closed form") {
  DispersionSpec k;
  k.kind = DispersionSpec::Kind::power;
  k.alpha = 0.5;
  k.gamma = 0.5;
  CHECK(k.drift_integral(1.0) == doctest::Approx(1.0 / 1.5).epsilon(1e-14));
  CHECK(k.drift_integral(0.25) ==
        doctest::Approx(std::pow(0.25, 1.5) / 1.5).epsilon(1e-14));
}

TEST_CASE("tabulated drift integral matches the closed form") {
  const int n = 200;
  DispersionSpec tab;
  tab.kind = DispersionSpec::Kind::tabulated;
  tab.gamma = 0.5;
  tab.face_values.resize(n);
  for (int j = 0; j < n; ++j) {
    const double xm = (j + 0.5) / n;
    tab.face_values[j] = std::sqrt(xm);
  }
  DispersionSpec exact;
  exact.kind = DispersionSpec::Kind::power;
  exact.alpha = 0.5;
  const double got = tab.drift_integral(1.0);
  const double want = exact.drift_integral(1.0);
  CHECK(std::abs(got - want) / want < 5e-3);
}
