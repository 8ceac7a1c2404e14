// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <random>

#include "cascade/config.hpp"
#include "cascade/field.hpp"

namespace testsup {

/// The desk-scale configuration used throughout the suites; n_a = n_x = n,
/// n_t = 2n/5 so that dt = da with T = 0.4, A = 1.
inline cascade::ProblemConfig desk_config(int n = 100) {
  cascade::ProblemConfig cfg;
  cfg.time_horizon = 0.4;
  cfg.max_age = 1.0;
  cfg.age_cutoff = 0.5;
  cfg.omega = {0.4, 0.7};
  cfg.omega1 = {0.45, 0.65};
  cfg.nu = 1.0;
  cfg.grid.n_x = n;
  cfg.grid.n_a = n;
  cfg.grid.n_t = (n * 2) / 5;
  cfg.grid.time_horizon = cfg.time_horizon;
  cfg.grid.max_age = cfg.max_age;
  cfg.k1.kind = cascade::DispersionSpec::Kind::power;
  cfg.k1.alpha = 0.3;
  cfg.k1.gamma = 0.6;
  cfg.k2.kind = cascade::DispersionSpec::Kind::power;
  cfg.k2.alpha = 0.6;
  cfg.k2.gamma = 0.6;
  cfg.rates.mu1 = {cascade::RateSpec::Kind::constant, 0.2};
  cfg.rates.mu2 = {cascade::RateSpec::Kind::constant, 0.2};
  cfg.rates.mu3 = {cascade::RateSpec::Kind::constant, 1.0};
  cfg.rates.beta1 = {cascade::RateSpec::Kind::ramp_age, 1.0};
  cfg.rates.beta2 = {cascade::RateSpec::Kind::ramp_age, 1.0};
  return cfg;
}

inline cascade::Field2D gaussian_bump(const cascade::GridSpec& g, double ca,
                                      double cx, double wa, double wx,
                                      double amp = 1.0) {
  cascade::Field2D f(g);
  for (int i = 0; i <= g.n_a; ++i)
    for (int j = 1; j <= g.n_x - 1; ++j) {
      const double a = g.a_node(i), x = g.x_node(j);
      const double ea = (a - ca) / wa, ex = (x - cx) / wx;
      f.at(i, j) = amp * std::exp(-ea * ea - ex * ex);
    }
  return f;
}

inline cascade::Field2D random_field(const cascade::GridSpec& g,
                                     std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  cascade::Field2D f(g);
  for (int i = 0; i <= g.n_a; ++i)
    for (int j = 1; j <= g.n_x - 1; ++j) f.at(i, j) = nd(rng);
  return f;
}

inline double l2_diff(const cascade::Problem& pb, const cascade::Field2D& a,
                      const cascade::Field2D& b) {
  double s = 0.0;
  for (int i = 0; i <= a.n_a(); ++i)
    for (int j = 0; j <= a.n_x(); ++j) {
      const double d = a.at(i, j) - b.at(i, j);
      s += pb.wa()[i] * pb.wx()[j] * d * d;
    }
  return std::sqrt(s);
}

}  // namespace testsup
