// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "cascade/field.hpp"
#include "cascade/kernels.hpp"

namespace cascade {

/// One time step of the forward scheme, from slice n to n+1:
///   (i)   exact shift along characteristics (dt = da);
///   (ii)  backward-Euler diffusion-reaction solve per age row for y,
///         with the control source inside the implicit step;
///   (iii) the same for p with the cascade source -mu3 * y_new;
///   (iv)  renewal fill of the a = 0 row from the age-trapezoid of beta * field.
/// Dirichlet columns stay identically zero throughout.
ForwardTrajectory solve_forward(const Problem& pb, const Field2D& y0,
                                const Field2D& p0, const ControlField* control,
                                Exec exec = default_exec());

/// Source mode of the backward system.
struct AdjointSources {
  enum class Mode {
    none,     // h1 = h2 = 0
    fields,   // explicit h1, h2 over (t, a, x)
    renewal,  // h1 = -beta1 u(t,0,x), h2 = -beta2 v(t,0,x), trace lagged one step
  };
  Mode mode = Mode::none;
  const std::vector<double>* h1 = nullptr;  // (n_t+1)(n_a+1)(n_x+1), t-major
  const std::vector<double>* h2 = nullptr;
};

/// Backward-in-time, backward-in-age march mirroring solve_forward; v is
/// updated before u within a step (v feeds u through mu3).  Terminal data
/// at t = T, zero age boundary at a = A.
AdjointTrajectory solve_adjoint(const Problem& pb, const Field2D& uT,
                                const Field2D& vT, const AdjointSources& src,
                                Exec exec = default_exec());

/// Exact transpose of the linear control-to-terminal-state map (zero initial
/// data): applies S^T to the quadrature-weighted, age-masked terminal
/// residuals and returns the q-Riesz representative (entries divided by the
/// t/a/x quadrature weights, zero outside omega).  Satisfies
///   <(y(T;c), p(T;c)) chi_{(delta,A)}, (r_y, r_p)>_{L2(QA)} = <c, out>_q
/// to machine precision for every control c.
ControlField discrete_adjoint_apply(const Problem& pb, const Field2D& r_y,
                                    const Field2D& r_p, Exec exec = default_exec());

enum class TraceKind { u_trace, v_trace, full_u, full_v };

/// Characteristic-line evaluation of the backward system.
///
/// The 1-D parabolic factor is realized by Crank-Nicolson marching along each
/// line (deliberately a different discretization family from the 2-D solver,
/// so the two routes are independent); integral source terms accumulate by
/// trapezoid in the line parameter.  The traces use the age-frozen source
/// arguments of the closed-form representation (the v-trace is the pure
/// parabolic propagation of the matching terminal age slice); the full-field
/// variants evaluate coefficients along the line.  Requires infertile
/// newborns (beta_i(.,0,.) = 0) for the trace variants.
struct CharacteristicField {
  TraceKind kind;
  int n_t = 0, n_a = 0, n_x = 0;
  // traces: (n_t+1) x (n_x+1); full fields: (n_t+1) x (n_a+1) x (n_x+1)
  std::vector<double> values;
  double& trace_at(int n, int j) { return values[static_cast<std::size_t>(n) * (n_x + 1) + j]; }
  double trace_at(int n, int j) const { return values[static_cast<std::size_t>(n) * (n_x + 1) + j]; }
  double& full_at(int n, int i, int j) {
    return values[(static_cast<std::size_t>(n) * (n_a + 1) + i) * (n_x + 1) + j];
  }
  double full_at(int n, int i, int j) const {
    return values[(static_cast<std::size_t>(n) * (n_a + 1) + i) * (n_x + 1) + j];
  }
};

CharacteristicField characteristic_trace(const Problem& pb, const Field2D& uT,
                                         const Field2D& vT, TraceKind kind,
                                         Exec exec = default_exec());

struct EnergyReport {
  double sup_t = 0.0;       // sup_t ||(y,p)(t)||^2 over (a,x)
  double sup_a = 0.0;       // sup_a ||(y,p)(a)||^2 over (t,x)
  double gradient_term = 0.0;  // int k1 y_x^2 + k2 p_x^2
  double control_term = 0.0;   // int_q control^2
  double data_term = 0.0;      // ||(y0,p0)||^2
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;
  bool vacuous = false;
};

/// Evaluates both sides of the a-priori energy inequality for a computed
/// forward trajectory.
EnergyReport energy_check(const Problem& pb, const ForwardTrajectory& traj,
                          const ControlField* control, const Field2D& y0,
                          const Field2D& p0, Exec exec = default_exec());

/// x-derivative at node j of a slice row: central at interior nodes,
/// one-sided second order next to the boundary columns.
double dx_at(const double* row, int j, int n_x, double dx);

}  // namespace cascade
