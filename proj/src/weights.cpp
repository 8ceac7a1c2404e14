// SPDX-License-Identifier: Apache-2.0
#include "cascade/weights.hpp"

#include <cmath>
#include <sstream>

namespace cascade {

SigmaFunction build_sigma(const Interval& omega1, const GridSpec& grid) {
  if (!(omega1.lo > 0.0 && omega1.hi < 1.0))
    throw Error("sigma: omega1 must lie inside (0,1)");
  const double xc = omega1.midpoint();

  // sigma_x(xc; b) is affine in b; bracket a sign change and bisect.
  auto gprime = [xc](double b) {
    return 1.0 + 2.0 * (b - 1.0) * xc - 3.0 * b * xc * xc;
  };
  double blo = -0.999, bhi = 64.0;
  if (gprime(blo) * gprime(bhi) > 0.0)
    throw Error("sigma: root bracketing failed for critical-point equation");
  for (int it = 0; it < 200; ++it) {
    const double bm = 0.5 * (blo + bhi);
    if (gprime(blo) * gprime(bm) <= 0.0)
      bhi = bm;
    else
      blo = bm;
  }
  SigmaFunction sig;
  sig.b = 0.5 * (blo + bhi);
  if (std::abs(sig.b) < 1e-12) sig.b = 0.0;  // symmetric case exactly
  sig.critical_point = xc;
  sig.sigma_inf = sig.value(xc);
  const double third = omega1.length() / 3.0;
  sig.omega0 = {omega1.lo + third, omega1.hi - third};

  // invariants on the grid
  for (int j = 1; j < grid.n_x; ++j) {
    const double x = grid.x_node(j);
    if (!(sig.value(x) > 0.0)) {
      std::ostringstream os;
      os << "sigma: nonpositive value at node x = " << x;
      throw Error(os.str());
    }
    if (!sig.omega0.contains(x) && sig.deriv(x) == 0.0) {
      std::ostringstream os;
      os << "sigma: vanishing slope outside omega0 at node x = " << x;
      throw Error(os.str());
    }
  }
  if (!(sig.sigma_inf > 0.0)) throw Error("sigma: nonpositive sup");
  return sig;
}

double theta(double t, double a, double time_horizon) {
  if (!(t > 0.0 && t < time_horizon && a > 0.0))
    throw Error("theta: singular at t in {0, T} or a = 0; use interior nodes");
  const double u = t * (time_horizon - t);
  return 1.0 / (u * u * u * u * a * a * a * a);
}

double log_theta(double t, double a, double time_horizon) {
  if (!(t > 0.0 && t < time_horizon && a > 0.0))
    throw Error("theta: singular at t in {0, T} or a = 0; use interior nodes");
  return -4.0 * (std::log(t) + std::log(time_horizon - t)) - 4.0 * std::log(a);
}

double psi(double x, double lambda, double d, const DispersionSpec& k) {
  return lambda * (k.drift_integral(x) - d);
}

WeightValues weights_at(double t, double a, double x, const WeightParams& wp,
                        const DispersionSpec& k1, const DispersionSpec& k2,
                        double time_horizon) {
  WeightValues w;
  w.theta = theta(t, a, time_horizon);
  w.psi1 = psi(x, wp.lambda1, wp.d1, k1);
  w.psi2 = psi(x, wp.lambda2, wp.d2, k2);
  w.sigma = wp.sigma.value(x);
  w.Psi = std::exp(wp.kappa * w.sigma) - std::exp(2.0 * wp.kappa * wp.sigma.sigma_inf);
  w.phi1 = w.theta * w.psi1;
  w.phi2 = w.theta * w.psi2;
  w.small_phi = w.theta * std::exp(wp.kappa * w.sigma);
  w.Phi = w.theta * w.Psi;
  return w;
}

Lambda2Interval lambda2_interval(double d2, double kappa, double sigma_inf,
                                 const DispersionSpec& k2, double gamma) {
  Lambda2Interval iv;
  const double k21 = k2.value(1.0);
  const double e1 = std::exp(kappa * sigma_inf);
  const double e2 = std::exp(2.0 * kappa * sigma_inf);
  iv.lo = k21 * (2.0 - gamma) * (e2 - 1.0) / (d2 * k21 * (2.0 - gamma) - 1.0);
  iv.hi = 4.0 * (e2 - e1) / (3.0 * d2);
  iv.hypotheses_met = d2 >= 5.0 / (k21 * (2.0 - gamma)) - 1e-12 &&
                      kappa >= 4.0 * std::log(2.0) / sigma_inf - 1e-12;
  if (iv.hypotheses_met && !(iv.lo < iv.hi))
    throw Error("lambda2 interval empty under valid hypotheses (internal inconsistency)");
  return iv;
}

WeightParams default_weight_params(const ProblemConfig& cfg) {
  WeightParams wp;
  wp.sigma = build_sigma(cfg.omega1, cfg.grid);
  // one gamma serves both coefficients: the larger of the two declared bounds
  const double gamma = std::max(cfg.k1.gamma, cfg.k2.gamma);
  wp.kappa = 4.0 * std::log(2.0) / wp.sigma.sigma_inf;
  wp.d2 = 1.01 * 5.0 / (cfg.k2.value(1.0) * (2.0 - gamma));
  const Lambda2Interval iv = lambda2_interval(wp.d2, wp.kappa, wp.sigma.sigma_inf, cfg.k2, gamma);
  wp.lambda2 = 0.5 * (iv.lo + iv.hi);
  wp.d1 = 1.1 / (cfg.k1.value(1.0) * (2.0 - gamma));
  const double drift1 = cfg.k1.drift_integral(1.0);
  const double denom = wp.d1 - drift1;
  if (!(denom > 0.0))
    throw Error("weights: d1 <= drift integral of k1; enlarge d1");
  wp.lambda1 = 1.01 * wp.lambda2 * wp.d2 / denom;
  wp.s = 1.0;
  return wp;
}

OrderingReport check_orderings(const WeightParams& wp, const DispersionSpec& k1,
                               const DispersionSpec& k2, const GridSpec& grid) {
  OrderingReport rep;
  const double e2 = std::exp(2.0 * wp.kappa * wp.sigma.sigma_inf);
  const Lambda2Interval iv =
      lambda2_interval(wp.d2, wp.kappa, wp.sigma.sigma_inf, k2,
                       std::max(k1.gamma, k2.gamma));
  rep.hypotheses_met = iv.hypotheses_met && wp.lambda2 >= iv.lo && wp.lambda2 < iv.hi;

  double m12 = 1e300, m2P = 1e300, m43 = 1e300;
  for (int j = 0; j <= grid.n_x; ++j) {
    const double x = grid.x_node(j);
    const double p1 = psi(x, wp.lambda1, wp.d1, k1);
    const double p2 = psi(x, wp.lambda2, wp.d2, k2);
    const double P = std::exp(wp.kappa * wp.sigma.value(x)) - e2;
    m12 = std::min(m12, p2 - p1);
    m2P = std::min(m2P, P - p2);
    m43 = std::min(m43, p2 - (4.0 / 3.0) * P);
  }
  rep.margin_psi1_psi2 = m12;
  rep.margin_psi2_Psi = m2P;
  rep.margin_four_thirds = m43;
  rep.psi1_le_psi2 = m12 >= 0.0;
  rep.psi2_le_Psi = m2P >= 0.0;
  rep.four_thirds_Psi_lt_psi2 = m43 > 0.0;
  return rep;
}

}  // namespace cascade
