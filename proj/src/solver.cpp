// SPDX-License-Identifier: Apache-2.0
#include "cascade/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cascade {

namespace {

void require_finite(const Field2D& f, int step, const char* what) {
  if (!f.finite())
    throw Error(std::string("solver: non-finite ") + what + " at step " +
                std::to_string(step));
}

/// Renewal fill: row0[j] = sum_i wa_i beta(t, a_i, x_j) field(i, j).
/// The i = 0 term uses the pre-fill row (zero); with infertile newborns it
/// vanishes identically anyway.
void renewal_fill(const Problem& pb, const std::vector<double>& beta,
                  int time_index, Field2D& f) {
  const GridSpec& g = pb.grid();
  std::vector<double> row0(g.n_x + 1, 0.0);
  for (int i = 0; i <= g.n_a; ++i) {
    const double w = pb.wa()[i];
    const double* src = f.row(i);
    for (int j = 0; j <= g.n_x; ++j)
      row0[j] += w * beta[pb.idx(time_index, i, j)] * src[j];
  }
  row0[0] = 0.0;
  row0[g.n_x] = 0.0;
  std::copy(row0.begin(), row0.end(), f.row(0));
}

void shift_age_up(const Field2D& src, Field2D& dst) {
  // dst row i <- src row i-1; row 0 cleared (renewal fills it later)
  const int na = src.n_a(), nxp = src.n_x() + 1;
  std::fill(dst.row(0), dst.row(0) + nxp, 0.0);
  for (int i = na; i >= 1; --i)
    std::copy(src.row(i - 1), src.row(i - 1) + nxp, dst.row(i));
}

void shift_age_down(const Field2D& src, Field2D& dst) {
  // dst row i <- src row i+1; top row gets the a = A boundary value 0
  const int na = src.n_a(), nxp = src.n_x() + 1;
  for (int i = 0; i < na; ++i)
    std::copy(src.row(i + 1), src.row(i + 1) + nxp, dst.row(i));
  std::fill(dst.row(na), dst.row(na) + nxp, 0.0);
}

}  // namespace

ForwardTrajectory solve_forward(const Problem& pb, const Field2D& y0,
                                const Field2D& p0, const ControlField* control,
                                Exec exec) {
  const GridSpec& g = pb.grid();
  ForwardTrajectory traj;
  traj.direction = Direction::forward;
  traj.y.reserve(g.n_t + 1);
  traj.p.reserve(g.n_t + 1);

  Field2D y = y0, p = p0;
  y.zero_x_boundary();
  p.zero_x_boundary();
  traj.y.push_back(y);
  traj.p.push_back(p);

  Field2D ytil(g), ptil(g), ynew(g), pnew(g), rhs(g);
  KernelWorkspace ws;
  ws.resize(g);

  for (int n = 0; n < g.n_t; ++n) {
    const int tn = n + 1;
    shift_age_up(traj.y[n], ytil);
    shift_age_up(traj.p[n], ptil);

    // y rows: control source folded into the implicit right-hand side
    if (control) {
      const double dt = g.dt();
      for (int i = 1; i <= g.n_a; ++i) {
        const double* base = ytil.row(i);
        double* out = rhs.row(i);
        for (int j = 0; j <= g.n_x; ++j) {
          const double th = (pb.in_omega(j) && j > 0 && j < g.n_x)
                                ? control->at(tn, i, j)
                                : 0.0;
          out[j] = base[j] + dt * th;
        }
      }
      implicit_rows(pb, 1, tn, rhs, nullptr, 0.0, ynew, 1, g.n_a, exec, ws);
    } else {
      implicit_rows(pb, 1, tn, ytil, nullptr, 0.0, ynew, 1, g.n_a, exec, ws);
    }

    std::fill(ynew.row(0), ynew.row(0) + g.n_x + 1, 0.0);

    // p rows: cascade source -mu3 * y_new, the just-updated slice
    implicit_rows(pb, 2, tn, ptil, &ynew, -1.0, pnew, 1, g.n_a, exec, ws);
    std::fill(pnew.row(0), pnew.row(0) + g.n_x + 1, 0.0);

    renewal_fill(pb, pb.rates().beta1, tn, ynew);
    renewal_fill(pb, pb.rates().beta2, tn, pnew);

    require_finite(ynew, tn, "y");
    require_finite(pnew, tn, "p");
    traj.y.push_back(ynew);
    traj.p.push_back(pnew);
  }
  return traj;
}

AdjointTrajectory solve_adjoint(const Problem& pb, const Field2D& uT,
                                const Field2D& vT, const AdjointSources& src,
                                Exec exec) {
  const GridSpec& g = pb.grid();
  const double dt = g.dt();
  AdjointTrajectory traj;
  traj.direction = Direction::backward;
  traj.u.assign(g.n_t + 1, Field2D(g));
  traj.v.assign(g.n_t + 1, Field2D(g));
  traj.u[g.n_t] = uT;
  traj.v[g.n_t] = vT;
  traj.u[g.n_t].zero_x_boundary();
  traj.v[g.n_t].zero_x_boundary();

  Field2D util(g), vtil(g), unew(g), vnew(g), rhs(g);
  KernelWorkspace ws;
  ws.resize(g);
  const RatesGrid& r = pb.rates();

  for (int n = g.n_t - 1; n >= 0; --n) {
    shift_age_down(traj.u[n + 1], util);
    shift_age_down(traj.v[n + 1], vtil);

    // v first (no coupling).  Reverse-time implicit step:
    //   (I + dt (mu2 - L2)) v_new = v_shift - dt h2(t_n)
    for (int i = 0; i <= g.n_a - 1; ++i) {
      const double* base = vtil.row(i);
      double* out = rhs.row(i);
      if (src.mode == AdjointSources::Mode::fields && src.h2) {
        for (int j = 0; j <= g.n_x; ++j)
          out[j] = base[j] - dt * (*src.h2)[pb.idx(n, i, j)];
      } else if (src.mode == AdjointSources::Mode::renewal) {
        // h2 = -beta2 v(t,0,x); trace lagged one step
        const double* trace = traj.v[n + 1].row(0);
        for (int j = 0; j <= g.n_x; ++j)
          out[j] = base[j] + dt * r.beta2[pb.idx(n, i, j)] * trace[j];
      } else {
        std::copy(base, base + g.n_x + 1, out);
      }
    }
    implicit_rows(pb, 2, n, rhs, nullptr, 0.0, vnew, 0, g.n_a - 1, exec, ws);
    std::fill(vnew.row(g.n_a), vnew.row(g.n_a) + g.n_x + 1, 0.0);

    // u: cascade source -mu3 v_new solved explicitly inside the step
    for (int i = 0; i <= g.n_a - 1; ++i) {
      const double* base = util.row(i);
      double* out = rhs.row(i);
      if (src.mode == AdjointSources::Mode::fields && src.h1) {
        for (int j = 0; j <= g.n_x; ++j)
          out[j] = base[j] - dt * (*src.h1)[pb.idx(n, i, j)];
      } else if (src.mode == AdjointSources::Mode::renewal) {
        const double* trace = traj.u[n + 1].row(0);
        for (int j = 0; j <= g.n_x; ++j)
          out[j] = base[j] + dt * r.beta1[pb.idx(n, i, j)] * trace[j];
      } else {
        std::copy(base, base + g.n_x + 1, out);
      }
    }
    implicit_rows(pb, 1, n, rhs, &vnew, -1.0, unew, 0, g.n_a - 1, exec, ws);
    std::fill(unew.row(g.n_a), unew.row(g.n_a) + g.n_x + 1, 0.0);

    require_finite(unew, n, "u");
    require_finite(vnew, n, "v");
    traj.u[n] = unew;
    traj.v[n] = vnew;
  }
  return traj;
}

ControlField discrete_adjoint_apply(const Problem& pb, const Field2D& r_y,
                                    const Field2D& r_p, Exec exec) {
  const GridSpec& g = pb.grid();
  const double dt = g.dt();
  const RatesGrid& r = pb.rates();
  ControlField out(g);

  // terminal adjoints: quadrature-weighted, age-masked residuals
  Field2D ly(g), lp(g);
  for (int i = 0; i <= g.n_a; ++i) {
    if (!pb.in_target_ages(i)) continue;
    for (int j = 1; j <= g.n_x - 1; ++j) {
      const double m = pb.wa()[i] * pb.wx()[j];
      ly.at(i, j) = m * r_y.at(i, j);
      lp.at(i, j) = m * r_p.at(i, j);
    }
  }

  Field2D lyh(g), lph(g), xi(g), zeta(g);
  KernelWorkspace ws;
  ws.resize(g);

  for (int n = g.n_t - 1; n >= 0; --n) {
    const int tn = n + 1;

    // transpose of the renewal fills: spread the row-0 adjoint through beta
    for (int i = g.n_a; i >= 0; --i) {
      const double w = pb.wa()[i];
      double* dy = lyh.row(i);
      double* dp = lph.row(i);
      const double* sy = ly.row(i);
      const double* sp = lp.row(i);
      const double* y0adj = ly.row(0);
      const double* p0adj = lp.row(0);
      for (int j = 0; j <= g.n_x; ++j) {
        const double keep_y = (i >= 1) ? sy[j] : 0.0;
        const double keep_p = (i >= 1) ? sp[j] : 0.0;
        dy[j] = keep_y + w * r.beta1[pb.idx(tn, i, j)] * y0adj[j];
        dp[j] = keep_p + w * r.beta2[pb.idx(tn, i, j)] * p0adj[j];
      }
    }
    lyh.zero_x_boundary();
    lph.zero_x_boundary();

    // transpose of the p solve (symmetric matrix): xi = B^{-1} lph, then the
    // cascade coupling feeds -dt mu3 xi into the y adjoint
    implicit_rows(pb, 2, tn, lph, nullptr, 0.0, xi, 1, g.n_a, exec, ws);
    for (int i = 1; i <= g.n_a; ++i) {
      double* dy = lyh.row(i);
      const double* x = xi.row(i);
      for (int j = 1; j <= g.n_x - 1; ++j)
        dy[j] -= dt * r.mu3[pb.idx(tn, i, j)] * x[j];
    }

    // transpose of the y solve; the control pickup is dt * zeta on omega
    implicit_rows(pb, 1, tn, lyh, nullptr, 0.0, zeta, 1, g.n_a, exec, ws);
    for (int i = 1; i <= g.n_a; ++i) {
      const double* z = zeta.row(i);
      for (int j = 1; j <= g.n_x - 1; ++j)
        if (pb.in_omega(j)) out.at(tn, i, j) = dt * z[j];
    }

    // transpose of the age shifts
    shift_age_down(zeta, ly);
    shift_age_down(xi, lp);
  }

  // q-Riesz representative: divide by the quadrature weights on the support
  for (int n = 0; n <= g.n_t; ++n)
    for (int i = 0; i <= g.n_a; ++i)
      for (int j = 1; j <= g.n_x - 1; ++j)
        if (pb.in_omega(j)) {
          const double w = pb.wt()[n] * pb.wa()[i] * pb.wx()[j];
          out.at(n, i, j) /= w;
        }
  return out;
}

namespace {

/// Crank-Nicolson march of the 1-D parabolic factor along a characteristic
/// line, one step from (time m+1, age row i+1) to (time m, age row i).
struct LineStepper {
  const Problem& pb;
  int eq;
  std::vector<double> cwork, dwork, stage, dold;

  explicit LineStepper(const Problem& p, int equation)
      : pb(p), eq(equation),
        cwork(p.grid().n_x + 1), dwork(p.grid().n_x + 1),
        stage(p.grid().n_x + 1), dold(p.grid().n_x + 1) {}

  // w <- (I - h/2 D_new)^{-1} [(I + h/2 D_old) w + extra], extra optional
  void step(int m_new, int i_new, int m_old, int i_old, std::vector<double>& w,
            const double* extra) {
    const double h = 0.5 * pb.grid().dt();
    apply_diffusion_row(pb, eq, m_old, i_old, w.data(), dold.data());
    const int nx = pb.grid().n_x;
    for (int j = 0; j <= nx; ++j) {
      stage[j] = w[j] + h * dold[j];
      if (extra) stage[j] += extra[j];
    }
    stage[0] = 0.0;
    stage[nx] = 0.0;
    implicit_row_general(pb, eq, m_new, i_new, h, stage.data(), w.data(),
                         cwork.data(), dwork.data());
  }
};

void require_infertile_newborns(const Problem& pb) {
  const RatesGrid& r = pb.rates();
  for (int n = 0; n <= pb.grid().n_t; ++n)
    for (int j = 0; j <= pb.grid().n_x; ++j)
      if (std::abs(r.beta1[pb.idx(n, 0, j)]) > 1e-14 ||
          std::abs(r.beta2[pb.idx(n, 0, j)]) > 1e-14)
        throw Error("traces require infertile newborns");
}

/// v(t,0,.) by pure parabolic propagation of the matching terminal age slice.
void compute_v_trace(const Problem& pb, const Field2D& vT, CharacteristicField& out,
                     Exec exec) {
  const GridSpec& g = pb.grid();
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (int n = 0; n <= g.n_t; ++n) {
    LineStepper st(pb, 2);
    std::vector<double> w(g.n_x + 1);
    const int slice = g.n_t - n;  // terminal age index on the line through (t_n, 0)
    std::copy(vT.row(slice), vT.row(slice) + g.n_x + 1, w.begin());
    w[0] = 0.0;
    w[g.n_x] = 0.0;
    for (int m = g.n_t - 1; m >= n; --m)
      st.step(m, m - n, m + 1, m + 1 - n, w, nullptr);
    for (int j = 0; j <= g.n_x; ++j) out.trace_at(n, j) = w[j];
  }
}

}  // namespace

CharacteristicField characteristic_trace(const Problem& pb, const Field2D& uT,
                                         const Field2D& vT, TraceKind kind,
                                         Exec exec) {
  require_infertile_newborns(pb);
  const GridSpec& g = pb.grid();
  const RatesGrid& r = pb.rates();
  const double dt = g.dt();
  CharacteristicField out;
  out.kind = kind;
  out.n_t = g.n_t;
  out.n_a = g.n_a;
  out.n_x = g.n_x;

  const bool par = exec == Exec::parallel;

  if (kind == TraceKind::v_trace) {
    out.values.assign(static_cast<std::size_t>(g.n_t + 1) * (g.n_x + 1), 0.0);
    compute_v_trace(pb, vT, out, exec);
    return out;
  }

  if (kind == TraceKind::u_trace) {
    // needs the v trace first; source arguments frozen at age 0
    CharacteristicField vtr;
    vtr.kind = TraceKind::v_trace;
    vtr.n_t = g.n_t;
    vtr.n_a = g.n_a;
    vtr.n_x = g.n_x;
    vtr.values.assign(static_cast<std::size_t>(g.n_t + 1) * (g.n_x + 1), 0.0);
    compute_v_trace(pb, vT, vtr, exec);

    out.values.assign(static_cast<std::size_t>(g.n_t + 1) * (g.n_x + 1), 0.0);
#pragma omp parallel for schedule(static) if (par)
    for (int n = 0; n <= g.n_t; ++n) {
      LineStepper st(pb, 1);
      const int len = g.n_t - n;
      std::vector<double> w(g.n_x + 1), duh(g.n_x + 1, 0.0), f(g.n_x + 1), fprev(g.n_x + 1);
      std::copy(uT.row(len), uT.row(len) + g.n_x + 1, w.begin());
      w[0] = 0.0;
      w[g.n_x] = 0.0;
      auto source = [&](int m, double* dst) {
        // f(l) = -mu3(l, 0, .) v(l, 0, .)
        for (int j = 0; j <= g.n_x; ++j)
          dst[j] = -r.mu3[pb.idx(m, 0, j)] * vtr.trace_at(m, j);
      };
      if (len > 0) source(g.n_t, fprev.data());
      for (int m = g.n_t - 1; m >= n; --m) {
        // trapezoid Duhamel: D_m = S(dt)(D_{m+1} + dt/2 f_{m+1}) + dt/2 f_m
        for (int j = 0; j <= g.n_x; ++j) duh[j] += 0.5 * dt * fprev[j];
        st.step(m, m - n, m + 1, m + 1 - n, duh, nullptr);
        source(m, f.data());
        for (int j = 0; j <= g.n_x; ++j) duh[j] += 0.5 * dt * f[j];
        std::swap(f, fprev);
        // main term
        st.step(m, m - n, m + 1, m + 1 - n, w, nullptr);
      }
      for (int j = 0; j <= g.n_x; ++j) out.trace_at(n, j) = w[j] + duh[j];
    }
    return out;
  }

  // full fields: march whole characteristic lines, coefficients along the line
  out.values.assign(
      static_cast<std::size_t>(g.n_t + 1) * (g.n_a + 1) * (g.n_x + 1), 0.0);

  CharacteristicField vtr;
  vtr.kind = TraceKind::v_trace;
  vtr.n_t = g.n_t;
  vtr.n_a = g.n_a;
  vtr.n_x = g.n_x;
  vtr.values.assign(static_cast<std::size_t>(g.n_t + 1) * (g.n_x + 1), 0.0);
  compute_v_trace(pb, vT, vtr, exec);

  CharacteristicField utr;
  const bool need_utrace = kind == TraceKind::full_u;
  if (need_utrace) {
    utr = characteristic_trace(pb, uT, vT, TraceKind::u_trace, exec);
  }

  // for full_u the v field along every line is needed: compute full_v once
  CharacteristicField vfull;
  if (kind == TraceKind::full_u)
    vfull = characteristic_trace(pb, uT, vT, TraceKind::full_v, exec);

  const int eq = (kind == TraceKind::full_v) ? 2 : 1;
  const Field2D& term = (kind == TraceKind::full_v) ? vT : uT;

#pragma omp parallel for schedule(static) if (par)
  for (int c = -g.n_t; c <= g.n_a; ++c) {
    LineStepper st(pb, eq);
    const int n_lo = std::max(0, -c);
    const int n_hi = std::min(g.n_t, g.n_a - c);
    if (n_hi < n_lo) continue;
    std::vector<double> w(g.n_x + 1, 0.0), duh(g.n_x + 1, 0.0), f(g.n_x + 1),
        fprev(g.n_x + 1, 0.0);
    const bool exits_time = (n_hi == g.n_t);
    if (exits_time) {
      std::copy(term.row(c + g.n_t), term.row(c + g.n_t) + g.n_x + 1, w.begin());
      w[0] = 0.0;
      w[g.n_x] = 0.0;
    }  // else: the line leaves through a = A where the state vanishes

    auto source = [&](int m, double* dst) {
      const int i = c + m;
      if (kind == TraceKind::full_v) {
        // beta2(l, a_l, .) v(l, 0, .)
        for (int j = 0; j <= g.n_x; ++j)
          dst[j] = r.beta2[pb.idx(m, i, j)] * vtr.trace_at(m, j);
      } else {
        // beta1(l, a_l, .) u(l, 0, .) - mu3(l, a_l, .) v(l, a_l, .)
        for (int j = 0; j <= g.n_x; ++j)
          dst[j] = r.beta1[pb.idx(m, i, j)] * utr.trace_at(m, j) -
                   r.mu3[pb.idx(m, i, j)] * vfull.full_at(m, i, j);
      }
    };

    for (int j = 0; j <= g.n_x; ++j)
      out.full_at(n_hi, c + n_hi, j) = w[j];
    if (n_hi > n_lo) source(n_hi, fprev.data());

    for (int m = n_hi - 1; m >= n_lo; --m) {
      for (int j = 0; j <= g.n_x; ++j) duh[j] += 0.5 * dt * fprev[j];
      st.step(m, c + m, m + 1, c + m + 1, duh, nullptr);
      source(m, f.data());
      for (int j = 0; j <= g.n_x; ++j) duh[j] += 0.5 * dt * f[j];
      std::swap(f, fprev);
      st.step(m, c + m, m + 1, c + m + 1, w, nullptr);
      for (int j = 0; j <= g.n_x; ++j)
        out.full_at(m, c + m, j) = w[j] + duh[j];
    }
  }
  return out;
}

double dx_at(const double* row, int j, int n_x, double dx) {
  if (j == 0) return (-3.0 * row[0] + 4.0 * row[1] - row[2]) / (2.0 * dx);
  if (j == n_x)
    return (3.0 * row[n_x] - 4.0 * row[n_x - 1] + row[n_x - 2]) / (2.0 * dx);
  return (row[j + 1] - row[j - 1]) / (2.0 * dx);
}

EnergyReport energy_check(const Problem& pb, const ForwardTrajectory& traj,
                          const ControlField* control, const Field2D& y0,
                          const Field2D& p0, Exec exec) {
  const GridSpec& g = pb.grid();
  EnergyReport rep;

  for (int n = 0; n <= g.n_t; ++n) {
    const Field2D& y = traj.y[n];
    const Field2D& p = traj.p[n];
    const double s = rowwise_weighted_sum(
        pb,
        [&](int i, int j) {
          const double a = y.at(i, j), b = p.at(i, j);
          return a * a + b * b;
        },
        exec);
    rep.sup_t = std::max(rep.sup_t, s);
  }

  for (int i = 0; i <= g.n_a; ++i) {
    double s = 0.0;
    for (int n = 0; n <= g.n_t; ++n) {
      double row = 0.0;
      for (int j = 0; j <= g.n_x; ++j) {
        const double a = traj.y[n].at(i, j), b = traj.p[n].at(i, j);
        row += pb.wx()[j] * (a * a + b * b);
      }
      s += pb.wt()[n] * row;
    }
    rep.sup_a = std::max(rep.sup_a, s);
  }

  rep.gradient_term = grid_weighted_sum(
      pb,
      [&](int n, int i, int j) {
        const double x = g.x_node(j);
        const double yx = dx_at(traj.y[n].row(i), j, g.n_x, g.dx());
        const double px = dx_at(traj.p[n].row(i), j, g.n_x, g.dx());
        return pb.config().k1.value(x) * yx * yx +
               pb.config().k2.value(x) * px * px;
      },
      exec);

  if (control) rep.control_term = q_inner(pb, *control, *control, exec);
  rep.data_term = y0.norm2(pb) + p0.norm2(pb);

  rep.lhs = rep.sup_t + rep.sup_a + rep.gradient_term;
  rep.rhs = rep.control_term + rep.data_term;
  rep.vacuous = rep.rhs < 1e-30;
  rep.ratio = rep.vacuous ? 0.0 : rep.lhs / rep.rhs;
  return rep;
}

}  // namespace cascade
