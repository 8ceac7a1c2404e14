// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cascade {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Half-open description of an open interval (lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x > lo && x < hi; }
  bool strictly_inside(const Interval& outer) const {
    return lo > outer.lo && hi < outer.hi;
  }
};

enum class Axis { x, a, t };

/// Uniform tensor grid over (t, a, x) in [0,T] x [0,A] x [0,1].
///
/// Nodes are cell edges: n_x+1 nodes in x, n_a+1 in a, n_t+1 in t.
/// The time step and age step must coincide so the aging operator
/// d/dt + d/da maps nodes to nodes (exact transport shift).
struct GridSpec {
  int n_x = 0;
  int n_a = 0;
  int n_t = 0;
  double time_horizon = 0.0;  // T
  double max_age = 0.0;       // A

  double dx() const { return 1.0 / n_x; }
  double da() const { return max_age / n_a; }
  double dt() const { return time_horizon / n_t; }

  double x_node(int j) const { return j * dx(); }
  double a_node(int i) const { return i * da(); }
  double t_node(int n) const { return n * dt(); }

  int axis_count(Axis ax) const {
    switch (ax) {
      case Axis::x: return n_x;
      case Axis::a: return n_a;
      default: return n_t;
    }
  }
  double axis_length(Axis ax) const {
    switch (ax) {
      case Axis::x: return 1.0;
      case Axis::a: return max_age;
      default: return time_horizon;
    }
  }

  bool characteristic_aligned() const {
    return std::abs(dt() - da()) < 1e-12 * da();
  }

  /// Structural soundness (counts, extents, alignment). Throws on violation.
  void require_valid() const;
};

/// Composite trapezoid weights along one axis; they sum to the axis length.
std::vector<double> quadrature_weights(const GridSpec& grid, Axis axis);

}  // namespace cascade
