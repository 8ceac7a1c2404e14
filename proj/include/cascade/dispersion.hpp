// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "cascade/grid.hpp"

namespace cascade {

/// Dispersion coefficient k(x) on [0,1].
///
/// Degenerate kinds vanish at x = 0; the admissible growth is
/// x k'(x) <= gamma k(x) with gamma in [0,1).  The constant kind is
/// nondegenerate and only serves the cut-interval estimate regime.
struct DispersionSpec {
  enum class Kind { power, tabulated, constant };

  Kind kind = Kind::power;
  double alpha = 0.5;   // power exponent
  double c = 1.0;       // constant value
  double gamma = 0.5;   // growth parameter of the standing hypothesis
  std::vector<double> face_values;  // tabulated: n_x values at cell faces

  bool degenerate() const { return kind != Kind::constant; }

  /// k(x); tabulated kinds interpolate linearly between faces.
  double value(double x) const;

  /// k'(x); closed form for power/constant, centered differences otherwise.
  double derivative(double x) const;

  /// k at face midpoint j+1/2 of the given grid.
  double face(const GridSpec& grid, int j) const;

  /// I(x) = int_0^x r / k(r) dr.  Closed form for power/constant kinds,
  /// graded trapezoid for tabulated kinds (integrand ~ r^{1-alpha} near 0).
  double drift_integral(double x) const;

  std::string kind_name() const;
};

}  // namespace cascade
