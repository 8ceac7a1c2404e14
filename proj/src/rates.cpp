// SPDX-License-Identifier: Apache-2.0
#include "cascade/rates.hpp"

#include <algorithm>
#include <cmath>

namespace cascade {

namespace {
double smoothstep(double r) {
  r = std::clamp(r, 0.0, 1.0);
  return r * r * (3.0 - 2.0 * r);
}
}  // namespace

double RateSpec::eval(double t, double a, double x, double max_age,
                      double time_horizon) const {
  switch (kind) {
    case Kind::constant:
      return value;
    case Kind::ramp_age:
      return value * 4.0 * a * (max_age - a) / (max_age * max_age);
    case Kind::smoothstep_age:
      return a1 > a0 ? value * smoothstep((a - a0) / (a1 - a0))
                     : (a >= a0 ? value : 0.0);
    case Kind::tabulated: {
      if (table.empty()) throw Error("rate: empty table");
      // nearest-node lookup on the table's own grid
      const int it = std::clamp(static_cast<int>(std::lround(t / time_horizon * tab_nt)), 0, tab_nt);
      const int ia = std::clamp(static_cast<int>(std::lround(a / max_age * tab_na)), 0, tab_na);
      const int ix = std::clamp(static_cast<int>(std::lround(x * tab_nx)), 0, tab_nx);
      return table[(static_cast<std::size_t>(it) * (tab_na + 1) + ia) * (tab_nx + 1) + ix];
    }
  }
  return 0.0;
}

std::string RateSpec::kind_name() const {
  switch (kind) {
    case Kind::constant: return "constant";
    case Kind::ramp_age: return "ramp_age";
    case Kind::smoothstep_age: return "smoothstep_age";
    default: return "tabulated";
  }
}

RatesGrid RatesGrid::sample(const RatesSpec& spec, const GridSpec& grid) {
  RatesGrid g;
  g.n_t = grid.n_t;
  g.n_a = grid.n_a;
  g.n_x = grid.n_x;
  const std::size_t total =
      static_cast<std::size_t>(grid.n_t + 1) * (grid.n_a + 1) * (grid.n_x + 1);
  auto fill = [&](const RateSpec& r, std::vector<double>& out) {
    out.resize(total);
    for (int n = 0; n <= grid.n_t; ++n)
      for (int i = 0; i <= grid.n_a; ++i)
        for (int j = 0; j <= grid.n_x; ++j)
          out[g.idx(n, i, j)] = r.eval(grid.t_node(n), grid.a_node(i),
                                       grid.x_node(j), grid.max_age,
                                       grid.time_horizon);
  };
  fill(spec.mu1, g.mu1);
  fill(spec.mu2, g.mu2);
  fill(spec.mu3, g.mu3);
  fill(spec.beta1, g.beta1);
  fill(spec.beta2, g.beta2);
  return g;
}

}  // namespace cascade
