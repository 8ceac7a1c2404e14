// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cascade/solver.hpp"

namespace cascade {

struct JValue {
  double J = 0.0;
  double terminal_residual_y = 0.0;  // int_0^1 int_delta^A y^2(T)
  double terminal_residual_p = 0.0;
  double young_residual = 0.0;       // ages (0, delta), informational only
  double control_energy = 0.0;       // int_q control^2
};

/// Penalized cost  J = (1/2 eps) int_0^1 int_delta^A (y^2 + p^2)(T)
///                   + (1/2) int_q control^2.
JValue evaluate_J(const Problem& pb, const ControlField& control, double epsilon,
                  const Field2D& y0, const Field2D& p0, Exec exec = default_exec());

/// Exact gradient in the q-weighted metric: control + (1/eps) S^T residuals,
/// supported on omega.  At a minimizer this recovers the adjoint
/// representation of the optimal control.
ControlField gradient_J(const Problem& pb, const ControlField& control,
                        double epsilon, const Field2D& y0, const Field2D& p0,
                        Exec exec = default_exec());

struct HumOptions {
  double epsilon = 1e-4;
  double tol = 1e-8;   // relative gradient decrease
  int max_iter = 2000;
  int restart_every = 50;
  Exec exec = default_exec();
};

struct HumResult {
  ControlField control;
  double epsilon = 0.0;
  double terminal_residual_y = 0.0;
  double terminal_residual_p = 0.0;
  double young_residual = 0.0;
  double control_energy = 0.0;
  int iterations = 0;
  double optimality_gap = 0.0;  // |grad| / |grad at iterate 0|
  double certificate = 0.0;     // |control + u chi_omega|_q / |control|_q
  bool converged = false;
  std::vector<double> J_history;
};

/// Conjugate-gradient minimization of the quadratic J (Polak-Ribiere with
/// periodic restart, exact line search via one linearized solve per
/// iteration), starting from the zero control.  Terminates once the
/// relative gradient is below tol and the optimality certificate is below
/// 10 tol (or at max_iter, flagged non-converged).
HumResult minimize_J(const Problem& pb, const Field2D& y0, const Field2D& p0,
                     const HumOptions& opt);

struct SweepRow {
  double epsilon = 0.0;
  double residual_y = 0.0, residual_p = 0.0;
  double residual_total = 0.0;
  double residual_over_epsilon = 0.0;
  double control_energy = 0.0;
  double energy_over_data = 0.0;  // control energy / ||(y0,p0)||^2
  int iterations = 0;
  bool converged = false;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  bool all_converged = false;
  bool residuals_nonincreasing = false;   // along decreasing epsilon
  double residual_over_eps_spread = 0.0;  // max / min of residual/eps
  double energy_spread = 0.0;             // max / min of control energy
  bool energy_within_2x = false;
  double data_norm2 = 0.0;
};

/// Runs minimize_J for each epsilon (given decreasing) and summarizes the
/// penalization trends.
SweepReport epsilon_sweep(const Problem& pb, const Field2D& y0, const Field2D& p0,
                          const std::vector<double>& epsilons,
                          const HumOptions& base);

}  // namespace cascade
