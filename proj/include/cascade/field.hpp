// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "cascade/config.hpp"

namespace cascade {

/// Nodal values over (age, x): (n_a+1) x (n_x+1), age-major.
class Field2D {
 public:
  Field2D() = default;
  Field2D(int n_a, int n_x) : na_(n_a), nx_(n_x), v_((n_a + 1) * (n_x + 1), 0.0) {}
  explicit Field2D(const GridSpec& g) : Field2D(g.n_a, g.n_x) {}

  int n_a() const { return na_; }
  int n_x() const { return nx_; }
  double& at(int i, int j) { return v_[static_cast<std::size_t>(i) * (nx_ + 1) + j]; }
  double at(int i, int j) const { return v_[static_cast<std::size_t>(i) * (nx_ + 1) + j]; }
  double* row(int i) { return v_.data() + static_cast<std::size_t>(i) * (nx_ + 1); }
  const double* row(int i) const { return v_.data() + static_cast<std::size_t>(i) * (nx_ + 1); }
  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

  bool finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  /// Zero the Dirichlet columns x = 0, x = 1 (projection into the discrete space).
  void zero_x_boundary() {
    for (int i = 0; i <= na_; ++i) {
      at(i, 0) = 0.0;
      at(i, nx_) = 0.0;
    }
  }

  /// Quadrature-weighted squared L2 norm over (a, x).
  double norm2(const Problem& pb) const {
    double s = 0.0;
    for (int i = 0; i <= na_; ++i)
      for (int j = 0; j <= nx_; ++j) {
        const double v = at(i, j);
        s += pb.wa()[i] * pb.wx()[j] * v * v;
      }
    return s;
  }

 private:
  int na_ = 0, nx_ = 0;
  std::vector<double> v_;
};

enum class Direction { forward, backward };

/// Forward state history: population pair (y, p), one slice per time node.
struct ForwardTrajectory {
  std::vector<Field2D> y, p;
  Direction direction = Direction::forward;
  int steps() const { return static_cast<int>(y.size()) - 1; }
};

/// Adjoint state history (u, v), one slice per time node.
struct AdjointTrajectory {
  std::vector<Field2D> u, v;
  Direction direction = Direction::backward;
  int steps() const { return static_cast<int>(u.size()) - 1; }
};

/// Control samples over (t, a, x), supported on omega in x.
class ControlField {
 public:
  ControlField() = default;
  explicit ControlField(const GridSpec& g)
      : nt_(g.n_t), na_(g.n_a), nx_(g.n_x),
        v_(static_cast<std::size_t>(g.n_t + 1) * (g.n_a + 1) * (g.n_x + 1), 0.0) {}

  int n_t() const { return nt_; }
  int n_a() const { return na_; }
  int n_x() const { return nx_; }
  std::size_t size() const { return v_.size(); }
  std::size_t idx(int n, int i, int j) const {
    return (static_cast<std::size_t>(n) * (na_ + 1) + i) * (nx_ + 1) + j;
  }
  double& at(int n, int i, int j) { return v_[idx(n, i, j)]; }
  double at(int n, int i, int j) const { return v_[idx(n, i, j)]; }
  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

  /// Zero every entry outside omega (and the Dirichlet columns).
  void mask_to_omega(const Problem& pb) {
    for (int n = 0; n <= nt_; ++n)
      for (int i = 0; i <= na_; ++i)
        for (int j = 0; j <= nx_; ++j)
          if (!pb.in_omega(j) || j == 0 || j == nx_) at(n, i, j) = 0.0;
  }

  bool supported_in_omega(const Problem& pb) const {
    for (int n = 0; n <= nt_; ++n)
      for (int i = 0; i <= na_; ++i)
        for (int j = 0; j <= nx_; ++j)
          if (!pb.in_omega(j) && at(n, i, j) != 0.0) return false;
    return true;
  }

  bool finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

 private:
  int nt_ = 0, na_ = 0, nx_ = 0;
  std::vector<double> v_;
};

}  // namespace cascade
