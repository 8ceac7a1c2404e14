// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "cascade/grid.hpp"

namespace cascade {

/// One vital rate (mortality, fertility, interaction) over (t, a, x).
///
/// Closed-form presets:
///   constant        value
///   ramp_age        value * 4 a (A - a) / A^2          (vanishes at a = 0)
///   smoothstep_age  value * smoothstep((a-a0)/(a1-a0)) (zero below maturity a0)
/// Tabulated rates carry their own (n_t+1, n_a+1, n_x+1) samples.
struct RateSpec {
  enum class Kind { constant, ramp_age, smoothstep_age, tabulated };

  Kind kind = Kind::constant;
  double value = 0.0;
  double a0 = 0.0, a1 = 0.0;          // smoothstep knots
  std::vector<double> table;          // tabulated samples, t-major
  int tab_nt = 0, tab_na = 0, tab_nx = 0;

  double eval(double t, double a, double x, double max_age,
              double time_horizon) const;
  bool closed_form() const { return kind != Kind::tabulated; }
  std::string kind_name() const;
};

struct RatesSpec {
  RateSpec mu1, mu2, mu3, beta1, beta2;
};

/// Rates sampled once onto the grid; all solver and quadrature code reads
/// these arrays so run reports do not depend on evaluation order.
struct RatesGrid {
  int n_t = 0, n_a = 0, n_x = 0;
  std::vector<double> mu1, mu2, mu3, beta1, beta2;

  std::size_t idx(int n, int i, int j) const {
    return (static_cast<std::size_t>(n) * (n_a + 1) + i) * (n_x + 1) + j;
  }
  static RatesGrid sample(const RatesSpec& spec, const GridSpec& grid);
};

}  // namespace cascade
