// SPDX-License-Identifier: Apache-2.0
#include "cascade/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cascade {

std::string variant_name(CarlemanVariant v) {
  switch (v) {
    case CarlemanVariant::coupled: return "coupled";
    case CarlemanVariant::single_boundary: return "single_boundary";
    case CarlemanVariant::nondegenerate: return "nondegenerate";
    case CarlemanVariant::renewal: return "renewal";
    case CarlemanVariant::localized: return "localized";
    case CarlemanVariant::transfer: return "transfer";
  }
  return "?";
}

std::optional<CarlemanVariant> variant_from_name(const std::string& name) {
  for (CarlemanVariant v :
       {CarlemanVariant::coupled, CarlemanVariant::single_boundary,
        CarlemanVariant::nondegenerate, CarlemanVariant::renewal,
        CarlemanVariant::localized, CarlemanVariant::transfer})
    if (variant_name(v) == name) return v;
  return std::nullopt;
}

namespace {

struct InteriorRange {
  int t_lo, t_hi, a_lo;  // inclusive; x runs over all nodes
};

InteriorRange interior(const GridSpec& g) {
  // singular nodes plus one truncation layer next to t in {0, T} and a = 0
  return {2, g.n_t - 2, 2};
}

/// log(positive factor) with zero short-circuit handled by the caller
inline double safe_log(double v) { return std::log(v); }

/// One weighted quadrature over the truncated interior:
/// sum w * exp(clamp(log_magnitude(n,i,j))) where f returns the
/// log-magnitude or -inf (meaning an exactly zero integrand).
template <class F>
double weighted_logsum(const Problem& pb, F&& logmag, Exec exec) {
  const GridSpec& g = pb.grid();
  const InteriorRange ir = interior(g);
  const int nrows = (ir.t_hi - ir.t_lo + 1) * (g.n_a - ir.a_lo + 1);
  std::vector<double> partial(std::max(nrows, 1), 0.0);
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (int r = 0; r < nrows; ++r) {
    const int n = ir.t_lo + r / (g.n_a - ir.a_lo + 1);
    const int i = ir.a_lo + r % (g.n_a - ir.a_lo + 1);
    double s = 0.0;
    for (int j = 0; j <= g.n_x; ++j) {
      const double lm = logmag(n, i, j);
      if (lm == -std::numeric_limits<double>::infinity()) continue;
      s += pb.wx()[j] * clamped_exp(lm);
    }
    partial[r] = pb.wt()[n] * pb.wa()[i] * s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Precomputed spatial weight profiles on the x-nodes.
struct XProfiles {
  std::vector<double> psi1, psi2, Psi, exp_kappa_sigma, x2_over_k1, x2_over_k2,
      k1, k2;
};

XProfiles x_profiles(const Problem& pb, const WeightParams& wp) {
  const GridSpec& g = pb.grid();
  const ProblemConfig& cfg = pb.config();
  XProfiles xp;
  const double e2 = std::exp(2.0 * wp.kappa * wp.sigma.sigma_inf);
  xp.psi1.resize(g.n_x + 1);
  xp.psi2.resize(g.n_x + 1);
  xp.Psi.resize(g.n_x + 1);
  xp.exp_kappa_sigma.resize(g.n_x + 1);
  xp.x2_over_k1.resize(g.n_x + 1);
  xp.x2_over_k2.resize(g.n_x + 1);
  xp.k1.resize(g.n_x + 1);
  xp.k2.resize(g.n_x + 1);
  for (int j = 0; j <= g.n_x; ++j) {
    const double x = g.x_node(j);
    xp.psi1[j] = psi(x, wp.lambda1, wp.d1, cfg.k1);
    xp.psi2[j] = psi(x, wp.lambda2, wp.d2, cfg.k2);
    const double es = std::exp(wp.kappa * wp.sigma.value(x));
    xp.exp_kappa_sigma[j] = es;
    xp.Psi[j] = es - e2;
    xp.k1[j] = cfg.k1.value(x);
    xp.k2[j] = cfg.k2.value(x);
    xp.x2_over_k1[j] = (j == 0) ? 0.0 : x * x / xp.k1[j];
    xp.x2_over_k2[j] = (j == 0) ? 0.0 : x * x / xp.k2[j];
  }
  return xp;
}

/// terminal young-age mass int_0^1 int_0^delta (uT^2 + vT^2)
double young_terminal_mass(const Problem& pb, const Field2D& uT, const Field2D& vT) {
  const GridSpec& g = pb.grid();
  const double delta = pb.config().age_cutoff;
  double total = 0.0;
  for (int i = 0; i <= g.n_a; ++i) {
    const double a = g.a_node(i);
    if (a > delta + 1e-14) break;
    // trapezoid on [0, min(delta, A)]
    double w = pb.wa()[i];
    if (std::abs(a - delta) < 1e-14) w = 0.5 * g.da();
    double row = 0.0;
    for (int j = 0; j <= g.n_x; ++j) {
      const double u = uT.at(i, j), v = vT.at(i, j);
      row += pb.wx()[j] * (u * u + v * v);
    }
    total += w * row;
  }
  return total;
}

double q_state_mass(const Problem& pb, const AdjointTrajectory& traj,
                    bool u_only, Exec exec) {
  return grid_weighted_sum(
      pb,
      [&](int n, int i, int j) {
        if (!pb.in_omega(j)) return 0.0;
        const double u = traj.u[n].at(i, j);
        double s = u * u;
        if (!u_only) {
          const double v = traj.v[n].at(i, j);
          s += v * v;
        }
        return s;
      },
      exec);
}

}  // namespace

CertEntry carleman_eval(const Problem& pb, const AdjointTrajectory& traj,
                        const WeightParams& wp, CarlemanVariant variant, double s,
                        const SourcePair* sources, const Field2D* uT,
                        const Field2D* vT, double transfer_eps, Exec exec) {
  if (!(s > 0.0)) throw Error("certify: s must be positive");
  const GridSpec& g = pb.grid();
  const double T = g.time_horizon;
  const double dx = g.dx();
  const XProfiles xp = x_profiles(pb, wp);
  const double log_s = std::log(s);

  const bool needs_sources = variant == CarlemanVariant::coupled ||
                             variant == CarlemanVariant::single_boundary ||
                             variant == CarlemanVariant::nondegenerate;
  if (needs_sources && sources == nullptr)
    throw Error("certify: variant requires explicit sources");
  if ((variant == CarlemanVariant::renewal || variant == CarlemanVariant::localized ||
       variant == CarlemanVariant::transfer) &&
      (uT == nullptr || vT == nullptr))
    throw Error("certify: variant requires terminal data");
  if (variant == CarlemanVariant::transfer) {
    // the window estimate needs the interaction bound on omega1
    const RatesGrid& r = pb.rates();
    for (int n = 0; n <= g.n_t; ++n)
      for (int i = 0; i <= g.n_a; ++i)
        for (int j = 0; j <= g.n_x; ++j)
          if (pb.in_omega1(j) && r.mu3[pb.idx(n, i, j)] < pb.config().nu - 1e-12)
            throw Error("certify: transfer variant requires mu3 >= nu on omega1");
  }

  // precomputed time-age envelope tables (hot path of the s-scan)
  std::vector<double> lt_tab(static_cast<std::size_t>(g.n_t + 1) * (g.n_a + 1), 0.0);
  std::vector<double> th_tab(lt_tab.size(), 0.0);
  {
    const InteriorRange ir = interior(g);
    for (int n = ir.t_lo; n <= ir.t_hi; ++n)
      for (int i = ir.a_lo; i <= g.n_a; ++i) {
        const std::size_t id = static_cast<std::size_t>(n) * (g.n_a + 1) + i;
        lt_tab[id] = log_theta(g.t_node(n), g.a_node(i), T);
        th_tab[id] = std::exp(lt_tab[id]);
      }
  }
  auto logtheta = [&](int n, int i) {
    return lt_tab[static_cast<std::size_t>(n) * (g.n_a + 1) + i];
  };
  auto theta_of = [&](int n, int i) {
    return th_tab[static_cast<std::size_t>(n) * (g.n_a + 1) + i];
  };
  auto ux_at = [&](int n, int i, int j) {
    return dx_at(traj.u[n].row(i), j, g.n_x, dx);
  };
  auto vx_at = [&](int n, int i, int j) {
    return dx_at(traj.v[n].row(i), j, g.n_x, dx);
  };

  // ---- left-hand side ----
  double lhs = 0.0;
  if (variant == CarlemanVariant::nondegenerate) {
    // int (s^3 smallphi^3 z^2 + s smallphi z_x^2) e^{2 s Phi}, z = u
    lhs = weighted_logsum(
        pb,
        [&](int n, int i, int j) {
          const double lt = logtheta(n, i);
          const double th = theta_of(n, i);
          const double e = 2.0 * s * th * xp.Psi[j];
          const double u = traj.u[n].at(i, j);
          const double ux = ux_at(n, i, j);
          const double cube = u * u * std::exp(3.0 * (log_s + lt)) *
                              xp.exp_kappa_sigma[j] * xp.exp_kappa_sigma[j] *
                              xp.exp_kappa_sigma[j];
          const double gradt = ux * ux * std::exp(log_s + lt) * xp.exp_kappa_sigma[j];
          const double mag = cube + gradt;
          if (mag == 0.0) return kNegInf;
          return std::log(mag) + e;
        },
        exec);
  } else {
    auto lhs_component = [&](int eq) {
      const std::vector<double>& psi_i = eq == 1 ? xp.psi1 : xp.psi2;
      const std::vector<double>& x2k = eq == 1 ? xp.x2_over_k1 : xp.x2_over_k2;
      const std::vector<double>& kk = eq == 1 ? xp.k1 : xp.k2;
      return weighted_logsum(
          pb,
          [&](int n, int i, int j) {
            const double lt = logtheta(n, i);
            const double th = theta_of(n, i);
            const double e = 2.0 * s * th * psi_i[j];
            const double w = eq == 1 ? traj.u[n].at(i, j) : traj.v[n].at(i, j);
            const double wx = eq == 1 ? ux_at(n, i, j) : vx_at(n, i, j);
            const double cube = w * w * x2k[j] * std::exp(3.0 * (log_s + lt));
            const double gradt = wx * wx * kk[j] * std::exp(log_s + lt);
            const double mag = cube + gradt;
            if (mag == 0.0) return kNegInf;
            return std::log(mag) + e;
          },
          exec);
    };
    if (variant == CarlemanVariant::single_boundary) {
      lhs = lhs_component(1);
    } else if (variant == CarlemanVariant::transfer) {
      // int_{omega1} s^3 Theta^3 v^2 e^{2 s Phi}
      lhs = weighted_logsum(
          pb,
          [&](int n, int i, int j) {
            if (!pb.in_omega1(j)) return kNegInf;
            const double lt = logtheta(n, i);
            const double th = theta_of(n, i);
            const double v = traj.v[n].at(i, j);
            if (v == 0.0) return kNegInf;
            return 3.0 * (log_s + lt) + 2.0 * std::log(std::abs(v)) +
                   2.0 * s * th * xp.Psi[j];
          },
          exec);
    } else {
      lhs = lhs_component(1) + lhs_component(2);
    }
  }

  // ---- right-hand side ----
  double rhs = 0.0;
  switch (variant) {
    case CarlemanVariant::coupled: {
      // sources against the global weight + windowed cube observation
      rhs += weighted_logsum(
          pb,
          [&](int n, int i, int j) {
            const double h1 = sources->h1.empty() ? 0.0 : sources->h1[pb.idx(n, i, j)];
            const double h2 = sources->h2.empty() ? 0.0 : sources->h2[pb.idx(n, i, j)];
            const double mag = h1 * h1 + h2 * h2;
            if (mag == 0.0) return kNegInf;
            const double th = theta_of(n, i);
            return std::log(mag) + 2.0 * s * th * xp.Psi[j];
          },
          exec);
      rhs += weighted_logsum(
          pb,
          [&](int n, int i, int j) {
            if (!pb.in_omega(j)) return kNegInf;
            const double u = traj.u[n].at(i, j);
            const double v = traj.v[n].at(i, j);
            const double mag = u * u + v * v;
            if (mag == 0.0) return kNegInf;
            const double lt = logtheta(n, i);
            const double th = theta_of(n, i);
            return std::log(mag) + 3.0 * (log_s + lt) + 2.0 * s * th * xp.Psi[j];
          },
          exec);
      break;
    }
    case CarlemanVariant::single_boundary: {
      rhs += weighted_logsum(
          pb,
          [&](int n, int i, int j) {
            const double h = sources->h1.empty() ? 0.0 : sources->h1[pb.idx(n, i, j)];
            if (h == 0.0) return kNegInf;
            const double th = theta_of(n, i);
            return 2.0 * std::log(std::abs(h)) + 2.0 * s * th * xp.psi1[j];
          },
          exec);
      // boundary observation s k(1) int int Theta u_x^2(t, a, 1) e^{2 s phi(t,a,1)}
      const InteriorRange ir = interior(g);
      const double k1_at_1 = xp.k1[g.n_x];
      double bterm = 0.0;
      for (int n = ir.t_lo; n <= ir.t_hi; ++n)
        for (int i = ir.a_lo; i <= g.n_a; ++i) {
          const double lt = logtheta(n, i);
          const double th = theta_of(n, i);
          const double ux = ux_at(n, i, g.n_x);
          if (ux == 0.0) continue;
          const double lm = log_s + std::log(k1_at_1) + lt +
                            2.0 * std::log(std::abs(ux)) +
                            2.0 * s * th * xp.psi1[g.n_x];
          bterm += pb.wt()[n] * pb.wa()[i] * clamped_exp(lm);
        }
      rhs += bterm;
      break;
    }
    case CarlemanVariant::nondegenerate: {
      rhs += weighted_logsum(
          pb,
          [&](int n, int i, int j) {
            const double h = sources->h1.empty() ? 0.0 : sources->h1[pb.idx(n, i, j)];
            if (h == 0.0) return kNegInf;
            const double th = theta_of(n, i);
            return 2.0 * std::log(std::abs(h)) + 2.0 * s * th * xp.Psi[j];
          },
          exec);
      rhs += weighted_logsum(
          pb,
          [&](int n, int i, int j) {
            if (!pb.in_omega(j)) return kNegInf;
            const double u = traj.u[n].at(i, j);
            if (u == 0.0) return kNegInf;
            const double lt = logtheta(n, i);
            const double th = theta_of(n, i);
            return 2.0 * std::log(std::abs(u)) + 3.0 * (log_s + lt) +
                   3.0 * std::log(xp.exp_kappa_sigma[j]) + 2.0 * s * th * xp.Psi[j];
          },
          exec);
      break;
    }
    case CarlemanVariant::renewal: {
      rhs += weighted_logsum(
          pb,
          [&](int n, int i, int j) {
            if (!pb.in_omega(j)) return kNegInf;
            const double u = traj.u[n].at(i, j);
            const double v = traj.v[n].at(i, j);
            const double mag = u * u + v * v;
            if (mag == 0.0) return kNegInf;
            const double lt = logtheta(n, i);
            const double th = theta_of(n, i);
            return std::log(mag) + 3.0 * (log_s + lt) + 2.0 * s * th * xp.Psi[j];
          },
          exec);
      rhs += young_terminal_mass(pb, *uT, *vT);
      break;
    }
    case CarlemanVariant::localized: {
      rhs += q_state_mass(pb, traj, /*u_only=*/true, exec);
      rhs += young_terminal_mass(pb, *uT, *vT);
      break;
    }
    case CarlemanVariant::transfer: {
      auto weighted_v = [&](bool grad) {
        return weighted_logsum(
            pb,
            [&](int n, int i, int j) {
              const double lt = logtheta(n, i);
              const double th = theta_of(n, i);
              const double e = 2.0 * s * th * xp.psi2[j];
              double mag;
              if (grad) {
                const double vx = vx_at(n, i, j);
                mag = vx * vx * xp.k2[j] * std::exp(log_s + lt);
              } else {
                const double v = traj.v[n].at(i, j);
                mag = v * v * xp.x2_over_k2[j] * std::exp(3.0 * (log_s + lt));
              }
              if (mag == 0.0) return kNegInf;
              return std::log(mag) + e;
            },
            exec);
      };
      rhs += transfer_eps * (weighted_v(false) + weighted_v(true));
      rhs += q_state_mass(pb, traj, /*u_only=*/true, exec);
      rhs += young_terminal_mass(pb, *uT, *vT);
      break;
    }
  }

  CertEntry entry;
  entry.s = s;
  entry.lhs = lhs;
  entry.rhs = rhs;
  entry.vacuous = !(lhs > 0.0) && !(rhs > 0.0);
  entry.ratio = (rhs > 0.0) ? lhs / rhs : 0.0;
  entry.log_lhs = lhs > 0.0 ? std::log(lhs) : kNegInf;
  entry.log_rhs = rhs > 0.0 ? std::log(rhs) : kNegInf;
  return entry;
}

Field2D random_bump_field(const Problem& pb, std::mt19937_64& rng, bool hum_cone) {
  const GridSpec& g = pb.grid();
  const double A = g.max_age;
  const double delta = pb.config().age_cutoff;
  std::uniform_real_distribution<double> ux(0.1, 0.9);
  std::uniform_real_distribution<double> uw(0.05, 0.2);

  struct Bump {
    double cx, ca, wx, wa;
  };
  Bump bumps[3];
  for (auto& b : bumps) {
    b.cx = ux(rng);
    const double fa = ux(rng);
    b.ca = hum_cone ? delta + fa * (A - delta) : fa * A;
    b.wx = uw(rng);
    b.wa = uw(rng) * A;
  }

  Field2D f(g);
  for (int i = 0; i <= g.n_a; ++i) {
    const double a = g.a_node(i);
    if (hum_cone && a <= delta) continue;
    for (int j = 1; j <= g.n_x - 1; ++j) {
      const double x = g.x_node(j);
      double v = 0.0;
      for (const auto& b : bumps) {
        const double ex = (x - b.cx) / b.wx;
        const double ea = (a - b.ca) / b.wa;
        v += std::exp(-ex * ex - ea * ea);
      }
      f.at(i, j) = v;
    }
  }
  const double nrm = std::sqrt(f.norm2(pb));
  if (nrm > 0.0)
    for (auto& v : f.data()) v /= nrm;
  return f;
}

CertReport scan_s(const Problem& pb, CarlemanVariant variant,
                  const WeightParams& wp, const ScanOptions& opt) {
  if (opt.s_grid.size() < 8) throw Error("s-grid too small");
  for (std::size_t k = 1; k < opt.s_grid.size(); ++k)
    if (!(opt.s_grid[k] > opt.s_grid[k - 1]))
      throw Error("certify: s-grid must be increasing");
  if (opt.n_draws < 1) throw Error("certify: need at least one draw");

  CertReport rep;
  rep.inequality = variant_name(variant);
  rep.s_values = opt.s_grid;
  rep.per_s.resize(opt.s_grid.size());
  for (std::size_t k = 0; k < opt.s_grid.size(); ++k) {
    rep.per_s[k].s = opt.s_grid[k];
    rep.per_s[k].vacuous = true;
  }

  std::mt19937_64 rng(opt.seed);
  const GridSpec& g = pb.grid();
  const bool renewal_mode = variant == CarlemanVariant::renewal ||
                            variant == CarlemanVariant::localized ||
                            variant == CarlemanVariant::transfer;

  for (int d = 0; d < opt.n_draws; ++d) {
    const Field2D uT = random_bump_field(pb, rng, false);
    const Field2D vT = random_bump_field(pb, rng, false);
    SourcePair sources;
    AdjointTrajectory traj;
    if (renewal_mode) {
      AdjointSources src;
      src.mode = AdjointSources::Mode::renewal;
      traj = solve_adjoint(pb, uT, vT, src, opt.exec);
    } else {
      // explicit time-constant bump sources
      const Field2D h1 = random_bump_field(pb, rng, false);
      const Field2D h2 = random_bump_field(pb, rng, false);
      const std::size_t total =
          static_cast<std::size_t>(g.n_t + 1) * (g.n_a + 1) * (g.n_x + 1);
      sources.h1.resize(total);
      sources.h2.resize(total);
      for (int n = 0; n <= g.n_t; ++n)
        for (int i = 0; i <= g.n_a; ++i)
          for (int j = 0; j <= g.n_x; ++j) {
            sources.h1[pb.idx(n, i, j)] = h1.at(i, j);
            sources.h2[pb.idx(n, i, j)] =
                variant == CarlemanVariant::coupled ? h2.at(i, j) : 0.0;
          }
      AdjointSources src;
      src.mode = AdjointSources::Mode::fields;
      src.h1 = &sources.h1;
      src.h2 = &sources.h2;
      Field2D vT_used = variant == CarlemanVariant::coupled ? vT : Field2D(g);
      traj = solve_adjoint(pb, uT, vT_used, src, opt.exec);
    }

    for (std::size_t k = 0; k < opt.s_grid.size(); ++k) {
      const CertEntry e =
          carleman_eval(pb, traj, wp, variant, opt.s_grid[k], &sources, &uT, &vT,
                        opt.transfer_eps, opt.exec);
      if (e.vacuous) continue;  // zero-measure guard
      CertEntry& slot = rep.per_s[k];
      if (slot.vacuous || e.ratio > slot.ratio) {
        const double s_keep = slot.s;
        slot = e;
        slot.s = s_keep;
      }
    }
  }

  // empirical s0: smallest s from which the max ratio stays within
  // stabilize_rtol of the tail value
  const CertEntry& tail = rep.per_s.back();
  if (!tail.vacuous) {
    const double rt = tail.ratio;
    auto close = [&](double r) {
      return std::abs(r - rt) <= opt.stabilize_rtol * std::abs(rt);
    };
    int first = -1;
    for (int k = static_cast<int>(rep.per_s.size()) - 1; k >= 0; --k) {
      if (rep.per_s[k].vacuous || !close(rep.per_s[k].ratio)) break;
      first = k;
    }
    if (first >= 0) {
      rep.s0_found = true;
      rep.empirical_s0 = rep.s_values[first];
      double c = 0.0;
      for (std::size_t k = first; k < rep.per_s.size(); ++k)
        c = std::max(c, rep.per_s[k].ratio);
      rep.fitted_C = c;
    }
  }

  // divergence test over the top decade
  if (!rep.per_s.empty()) {
    const double s_max = rep.s_values.back();
    double ratio_lo = -1.0, ratio_hi = rep.per_s.back().ratio;
    bool monotone_up = true;
    double prev = -1.0;
    for (std::size_t k = 0; k < rep.per_s.size(); ++k) {
      if (rep.s_values[k] < 0.1 * s_max || rep.per_s[k].vacuous) continue;
      if (ratio_lo < 0.0) ratio_lo = rep.per_s[k].ratio;
      if (prev >= 0.0 && rep.per_s[k].ratio < prev) monotone_up = false;
      prev = rep.per_s[k].ratio;
    }
    if (ratio_lo > 0.0 && monotone_up && ratio_hi > 10.0 * ratio_lo)
      rep.diverging = true;
  }

  rep.pass = rep.s0_found && std::isfinite(rep.fitted_C) && !rep.diverging;
  {
    const InteriorRange ir = interior(g);
    rep.note = "truncated quadrature: t-nodes [" + std::to_string(ir.t_lo) + "," +
               std::to_string(ir.t_hi) + "], a-nodes [" + std::to_string(ir.a_lo) +
               "," + std::to_string(g.n_a) + "]";
  }
  return rep;
}

std::optional<double> observability_quotient(const Problem& pb, const Field2D& uT,
                                             const Field2D& vT, Exec exec) {
  AdjointSources src;
  src.mode = AdjointSources::Mode::renewal;
  const AdjointTrajectory traj = solve_adjoint(pb, uT, vT, src, exec);
  const Field2D& u0 = traj.u.front();
  const Field2D& v0 = traj.v.front();
  const double num = u0.norm2(pb) + v0.norm2(pb);
  const double den = q_state_mass(pb, traj, /*u_only=*/true, exec) +
                     young_terminal_mass(pb, uT, vT);
  if (den < 1e-30) return std::nullopt;
  return num / den;
}

ObservabilityReport observability_study(const Problem& pb, int n_draws,
                                        std::uint64_t seed, bool hum_cone,
                                        Exec exec) {
  ObservabilityReport rep;
  std::mt19937_64 rng(seed);
  rep.all_finite = true;
  for (int d = 0; d < n_draws; ++d) {
    const Field2D uT = random_bump_field(pb, rng, hum_cone);
    const Field2D vT = random_bump_field(pb, rng, hum_cone);
    const auto q = observability_quotient(pb, uT, vT, exec);
    ++rep.draws;
    if (!q.has_value()) {
      ++rep.vacuous;
      continue;
    }
    if (!std::isfinite(*q)) rep.all_finite = false;
    rep.quotients.push_back(*q);
    rep.c_delta = std::max(rep.c_delta, *q);
  }
  return rep;
}

HardyResult hardy_poincare_constant(const DispersionSpec& k, const GridSpec& grid) {
  const int n = grid.n_x;
  if (n < 8) throw Error("hardy: grid too small");
  const double h = grid.dx();
  const int m = n - 1;  // interior nodes

  std::vector<double> mass(m), diag(m), off(m - 1);
  for (int j = 1; j <= m; ++j) {
    const double x = grid.x_node(j);
    mass[j - 1] = h * k.value(x) / (x * x);
  }
  std::vector<double> kf(n);
  for (int j = 0; j < n; ++j) kf[j] = k.face(grid, j);
  for (int j = 1; j <= m; ++j) diag[j - 1] = (kf[j - 1] + kf[j]) / h;
  for (int j = 1; j <= m - 1; ++j) off[j - 1] = -kf[j] / h;

  // inverse-power iteration on K w = (1/C) M w: repeatedly solve K z = M w
  std::vector<double> w(m), z(m), cw(m), dw(m);
  for (int j = 0; j < m; ++j) {
    const double x = grid.x_node(j + 1);
    w[j] = x * (1.0 - x);
  }
  auto thomas = [&](const std::vector<double>& rhs, std::vector<double>& out) {
    double pc = 0.0, pd = 0.0;
    for (int j = 0; j < m; ++j) {
      const double lower = j > 0 ? off[j - 1] : 0.0;
      const double den = diag[j] - lower * pc;
      const double inv = 1.0 / den;
      pc = (j < m - 1 ? off[j] : 0.0) * inv;
      pd = (rhs[j] - lower * pd) * inv;
      cw[j] = pc;
      dw[j] = pd;
    }
    double nxt = 0.0;
    for (int j = m - 1; j >= 0; --j) {
      nxt = dw[j] - cw[j] * nxt;
      out[j] = nxt;
    }
  };
  auto apply_K = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (int j = 0; j < m; ++j) {
      double s = diag[j] * v[j];
      if (j > 0) s += off[j - 1] * v[j - 1];
      if (j < m - 1) s += off[j] * v[j + 1];
      out[j] = s;
    }
  };

  double rho_old = 0.0;
  int it = 0;
  const int max_it = 10000;
  std::vector<double> Kw(m);
  for (; it < max_it; ++it) {
    for (int j = 0; j < m; ++j) z[j] = mass[j] * w[j];
    thomas(z, w);
    double nrm = 0.0;
    for (double v : w) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (auto& v : w) v /= nrm;
    apply_K(w, Kw);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < m; ++j) {
      num += mass[j] * w[j] * w[j];
      den += w[j] * Kw[j];
    }
    const double rho = num / den;
    if (it > 0 && std::abs(rho - rho_old) <= 1e-13 * std::abs(rho)) {
      rho_old = rho;
      break;
    }
    rho_old = rho;
  }
  if (it >= max_it) throw Error("hardy: eigen-iteration did not converge");

  HardyResult res;
  res.constant = rho_old;
  res.iterations = it + 1;
  res.extremizer = w;
  return res;
}

CaccioppoliResult caccioppoli_check(const Problem& pb, const AdjointTrajectory& traj,
                                    const SourcePair& sources,
                                    const WeightParams& wp, Interval omega_prime,
                                    Exec exec) {
  if (!omega_prime.strictly_inside(pb.config().omega))
    throw Error("caccioppoli: omega' must lie strictly inside omega");
  const GridSpec& g = pb.grid();
  const XProfiles xp = x_profiles(pb, wp);
  const double s = wp.s;
  const double dx = g.dx();

  CaccioppoliResult out;
  for (int which = 1; which <= 2; ++which) {
    const std::vector<double>& psi_i = which == 1 ? xp.psi1 : xp.psi2;
    auto logtheta = [&](int n, int i) {
      return log_theta(g.t_node(n), g.a_node(i), g.time_horizon);
    };
    const double lhs = weighted_logsum(
        pb,
        [&](int n, int i, int j) {
          if (!omega_prime.contains(g.x_node(j))) return kNegInf;
          const double ux = dx_at(traj.u[n].row(i), j, g.n_x, dx);
          const double vx = dx_at(traj.v[n].row(i), j, g.n_x, dx);
          const double mag = ux * ux + vx * vx;
          if (mag == 0.0) return kNegInf;
          const double th = std::exp(logtheta(n, i));
          return std::log(mag) + 2.0 * s * th * psi_i[j];
        },
        exec);
    const double rhs =
        weighted_logsum(
            pb,
            [&](int n, int i, int j) {
              const double u = traj.u[n].at(i, j);
              const double v = traj.v[n].at(i, j);
              const double mag = u * u + v * v;
              if (mag == 0.0) return kNegInf;
              const double lt = logtheta(n, i);
              const double th = std::exp(lt);
              return std::log(mag) + 2.0 * (std::log(s) + lt) +
                     2.0 * s * th * psi_i[j];
            },
            exec) +
        weighted_logsum(
            pb,
            [&](int n, int i, int j) {
              const double h1 = sources.h1.empty() ? 0.0 : sources.h1[pb.idx(n, i, j)];
              const double h2 = sources.h2.empty() ? 0.0 : sources.h2[pb.idx(n, i, j)];
              const double mag = h1 * h1 + h2 * h2;
              if (mag == 0.0) return kNegInf;
              const double th = std::exp(logtheta(n, i));
              return std::log(mag) + 2.0 * s * th * psi_i[j];
            },
            exec);
    CertEntry e;
    e.s = s;
    e.lhs = lhs;
    e.rhs = rhs;
    e.vacuous = !(lhs > 0.0) && !(rhs > 0.0);
    e.ratio = rhs > 0.0 ? lhs / rhs : 0.0;
    e.log_lhs = lhs > 0.0 ? std::log(lhs) : kNegInf;
    e.log_rhs = rhs > 0.0 ? std::log(rhs) : kNegInf;
    (which == 1 ? out.weight1 : out.weight2) = e;
  }
  return out;
}

double weight_sup_exponent(const Problem& pb, const WeightParams& wp, int p,
                           double m1, double m2, double s) {
  const GridSpec& g = pb.grid();
  const XProfiles xp = x_profiles(pb, wp);
  const InteriorRange ir = interior(g);
  double sup = -std::numeric_limits<double>::infinity();
  for (int n = ir.t_lo; n <= ir.t_hi; ++n)
    for (int i = ir.a_lo; i <= g.n_a; ++i) {
      const double lt = log_theta(g.t_node(n), g.a_node(i), g.time_horizon);
      const double th = std::exp(lt);
      for (int j = 0; j <= g.n_x; ++j) {
        const double e = p * (std::log(s) + lt) +
                         2.0 * s * th * (m1 * xp.Psi[j] - m2 * xp.psi2[j]);
        sup = std::max(sup, e);
      }
    }
  return sup;
}

}  // namespace cascade
