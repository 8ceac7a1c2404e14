// SPDX-License-Identifier: Apache-2.0
#include "cascade/grid.hpp"

#include <cmath>

namespace cascade {

void GridSpec::require_valid() const {
  if (n_x < 8 || n_a < 8 || n_t < 8)
    throw Error("grid: all axis counts must be >= 8");
  if (time_horizon <= 0.0 || max_age <= 0.0)
    throw Error("grid: extents must be positive");
  if (!characteristic_aligned())
    throw Error("grid: dt must equal da (T/n_t vs A/n_a misaligned)");
}

std::vector<double> quadrature_weights(const GridSpec& grid, Axis axis) {
  const int n = grid.axis_count(axis);
  const double h = grid.axis_length(axis) / n;
  std::vector<double> w(n + 1, h);
  w.front() = 0.5 * h;
  w.back() = 0.5 * h;
  return w;
}

}  // namespace cascade
