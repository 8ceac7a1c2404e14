// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "cascade/solver.hpp"
#include "cascade/weights.hpp"

namespace cascade {

/// Weighted-inequality variants evaluated numerically.  Names follow the
/// role of each estimate:
///   coupled          intermediate system with explicit sources, global weights
///   single_boundary  one degenerate equation, boundary observation at x = 1
///   nondegenerate    uniformly parabolic regime (constant dispersion)
///   renewal          full backward system with renewal sources
///   localized        observation restricted to the control window
///   transfer         window estimate passing v-information through u
enum class CarlemanVariant {
  coupled,
  single_boundary,
  nondegenerate,
  renewal,
  localized,
  transfer,
};

std::string variant_name(CarlemanVariant v);
std::optional<CarlemanVariant> variant_from_name(const std::string& name);

struct CertEntry {
  double s = 0.0;
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;
  double log_lhs = 0.0, log_rhs = 0.0;
  bool vacuous = false;
};

struct CertReport {
  std::string inequality;
  std::vector<double> s_values;
  std::vector<CertEntry> per_s;  // max-over-draws at each s
  double fitted_C = 0.0;
  double empirical_s0 = 0.0;
  bool s0_found = false;
  bool diverging = false;
  std::optional<double> refinement_change;  // relative change under refinement
  bool pass = false;
  std::string note;
};

/// Explicit sources for the intermediate-system variants.
struct SourcePair {
  std::vector<double> h1, h2;  // (n_t+1)(n_a+1)(n_x+1), may be empty
};

/// Evaluates one inequality at one Carleman parameter s on a solved
/// trajectory.  All weighted quadratures run in log space with the
/// exponent floor `kExpFloor`; the boundary layers (two time nodes next to
/// t in {0,T} and the age node next to a = 0, plus the singular nodes
/// themselves) are excluded.
CertEntry carleman_eval(const Problem& pb, const AdjointTrajectory& traj,
                        const WeightParams& wp, CarlemanVariant variant, double s,
                        const SourcePair* sources, const Field2D* uT,
                        const Field2D* vT, double transfer_eps = 1.0,
                        Exec exec = default_exec());

struct ScanOptions {
  std::vector<double> s_grid;      // increasing, at least 8 points
  int n_draws = 10;
  std::uint64_t seed = 1;
  double stabilize_rtol = 0.10;    // s0 detector
  double transfer_eps = 1.0;
  Exec exec = default_exec();
};

/// Scans the inequality across the s-grid over seeded random draws.
/// empirical s0 = smallest grid point whose max-over-draws ratio stays
/// within stabilize_rtol of the value at the largest s from there on.
CertReport scan_s(const Problem& pb, CarlemanVariant variant,
                  const WeightParams& wp, const ScanOptions& opt);

/// Observability quotient for one terminal datum:
///   [ int (u^2 + v^2)(0) ] / [ int_q u^2 + int_0^1 int_0^delta (uT^2 + vT^2) ].
/// Returns nullopt when the denominator is below the vacuous guard 1e-30.
std::optional<double> observability_quotient(const Problem& pb, const Field2D& uT,
                                             const Field2D& vT,
                                             Exec exec = default_exec());

struct ObservabilityReport {
  double c_delta = 0.0;  // max quotient over draws
  int draws = 0, vacuous = 0;
  std::vector<double> quotients;
  bool all_finite = false;
};

/// Seeded sampling study of the observability quotient; hum_cone draws are
/// supported in ages (delta, A) only.
ObservabilityReport observability_study(const Problem& pb, int n_draws,
                                        std::uint64_t seed, bool hum_cone,
                                        Exec exec = default_exec());

struct HardyResult {
  double constant = 0.0;
  int iterations = 0;
  std::vector<double> extremizer;  // interior nodes 1..n_x-1
};

/// Largest discrete Rayleigh quotient of int (k/x^2) w^2 / int k w_x^2 over
/// grid functions vanishing at both ends, by inverse-power iteration on the
/// stiffness/mass pencil.
HardyResult hardy_poincare_constant(const DispersionSpec& k, const GridSpec& grid);

/// Local gradient-energy bound: both ratios (weight index 1 and 2) of
///   int_{omega'} (u_x^2 + v_x^2) e^{2 s phi_i}
/// over
///   int_Q s^2 Theta^2 (u^2 + v^2) e^{2 s phi_i} + int_Q (h1^2+h2^2) e^{2 s phi_i}.
struct CaccioppoliResult {
  CertEntry weight1, weight2;
};
CaccioppoliResult caccioppoli_check(const Problem& pb, const AdjointTrajectory& traj,
                                    const SourcePair& sources,
                                    const WeightParams& wp, Interval omega_prime,
                                    Exec exec = default_exec());

/// Random draw machinery: sum of three Gaussian bumps with seeded centers
/// and widths, unit L2 norm; hum_cone restricts the support to ages > delta.
Field2D random_bump_field(const Problem& pb, std::mt19937_64& rng, bool hum_cone);

/// Largest exponent of s^p Theta^p e^{2 s (m1 Phi - m2 phi2)} over the
/// truncated interior nodes; finite iff the combined weight stays bounded.
double weight_sup_exponent(const Problem& pb, const WeightParams& wp, int p,
                           double m1, double m2, double s);

}  // namespace cascade
