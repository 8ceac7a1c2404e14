// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <utility>

#include "cascade/config.hpp"

namespace cascade {

/// Exponent floor for log-space weight evaluation.  Magnitudes like
/// Theta^3 e^{2 s phi} are formed as exp(log-magnitude) with the exponent
/// clamped here; anything smaller underflows to the same representable
/// floor instead of denormal noise.
inline constexpr double kExpFloor = -700.0;

inline double clamped_exp(double e) {
  return std::exp(e < kExpFloor ? kExpFloor : e);
}

/// Spatial weight profile sigma(x) = x (1-x) (1 + b x): positive inside
/// (0,1), vanishing at the ends, with its single interior critical point
/// placed at the midpoint of omega1.
struct SigmaFunction {
  double b = 0.0;
  double critical_point = 0.5;
  double sigma_inf = 0.25;  // sup of sigma = sigma(critical_point)
  Interval omega0;          // middle third of omega1; sigma_x != 0 outside

  double value(double x) const { return x * (1.0 - x) * (1.0 + b * x); }
  double deriv(double x) const {
    return 1.0 + 2.0 * (b - 1.0) * x - 3.0 * b * x * x;
  }
};

/// Finds b by bisection so the critical point lands at midpoint(omega1),
/// then verifies positivity and the sign structure of sigma_x on the grid.
SigmaFunction build_sigma(const Interval& omega1, const GridSpec& grid);

/// Carleman weight parameters; sigma is carried along, the dispersion
/// specs are passed to the evaluators.
struct WeightParams {
  double lambda1 = 0.0, lambda2 = 0.0;
  double d1 = 0.0, d2 = 0.0;
  double kappa = 0.0;
  double s = 1.0;
  SigmaFunction sigma;
};

/// Time-age envelope 1 / ((t(T-t))^4 a^4).  Throws on the singular set
/// t in {0, T}, a = 0.
double theta(double t, double a, double time_horizon);

/// log(theta); same domain restrictions.
double log_theta(double t, double a, double time_horizon);

/// psi(x) = lambda (int_0^x r/k - d); strictly negative under the d-bounds.
double psi(double x, double lambda, double d, const DispersionSpec& k);

struct WeightValues {
  double theta = 0.0;
  double psi1 = 0.0, psi2 = 0.0;
  double sigma = 0.0, Psi = 0.0;
  double phi1 = 0.0, phi2 = 0.0;  // Theta * psi_i
  double small_phi = 0.0;         // Theta * e^{kappa sigma}
  double Phi = 0.0;               // Theta * Psi
};

/// Evaluates every weight at an interior node.
WeightValues weights_at(double t, double a, double x, const WeightParams& wp,
                        const DispersionSpec& k1, const DispersionSpec& k2,
                        double time_horizon);

struct Lambda2Interval {
  double lo = 0.0, hi = 0.0;
  bool hypotheses_met = false;  // d2 and kappa bounds verified
};

/// Admissible interval [lo, hi) for lambda2; lo < hi is asserted only when
/// the d2/kappa hypotheses hold (otherwise reported, not enforced).
Lambda2Interval lambda2_interval(double d2, double kappa, double sigma_inf,
                                 const DispersionSpec& k2, double gamma);

/// Deterministic defaults satisfying the parameter constraints with small
/// safety factors; lambda2 is the midpoint of its admissible interval.
WeightParams default_weight_params(const ProblemConfig& cfg);

struct OrderingReport {
  bool hypotheses_met = true;
  bool psi1_le_psi2 = false;
  bool psi2_le_Psi = false;
  bool four_thirds_Psi_lt_psi2 = false;
  // worst (smallest) margins over the grid
  double margin_psi1_psi2 = 0.0;        // min(psi2 - psi1)
  double margin_psi2_Psi = 0.0;         // min(Psi - psi2)
  double margin_four_thirds = 0.0;      // min(psi2 - 4/3 Psi)
  bool all_hold() const { return psi1_le_psi2 && psi2_le_Psi && four_thirds_Psi_lt_psi2; }
};

/// Verifies the pointwise weight orderings at every x-node.
OrderingReport check_orderings(const WeightParams& wp, const DispersionSpec& k1,
                               const DispersionSpec& k2, const GridSpec& grid);

}  // namespace cascade
