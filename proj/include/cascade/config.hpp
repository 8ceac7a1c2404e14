// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cascade/dispersion.hpp"
#include "cascade/grid.hpp"
#include "cascade/rates.hpp"

namespace cascade {

/// Problem data for one run: geometry, dispersion, vital rates, grid.
/// Plain data; `validate` reports on the standing hypotheses, `Problem`
/// turns a sound config into the immutable runtime object.
struct ProblemConfig {
  int schema_version = 1;
  double time_horizon = 0.0;  // T
  double max_age = 0.0;       // A
  double age_cutoff = 0.0;    // delta: extinction target covers ages (delta, A)
  Interval omega;             // control window in x
  Interval omega1;            // interaction window, closure(omega1) in omega
  double nu = 0.0;            // lower bound of mu3 over omega1
  GridSpec grid;
  DispersionSpec k1, k2;
  RatesSpec rates;
};

struct ClauseCheck {
  std::string clause;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<std::string> structural_errors;  // hard failures, checked first
  std::vector<ClauseCheck> clauses;            // hypothesis checks
  bool structurally_sound() const { return structural_errors.empty(); }
  bool pass() const;
  const ClauseCheck* find(const std::string& clause) const;
};

/// Checks every standing hypothesis on the grid: dispersion growth and
/// degeneracy, rate nonnegativity and boundedness, newborn infertility,
/// the interaction lower bound on omega1, and the geometric orderings
/// T < delta < A and omega1 inside omega.  Pure; never throws.
ValidationReport validate(const ProblemConfig& cfg);

/// Immutable runtime problem: sampled rates, quadrature weights, masks,
/// face-centered dispersion values.  Safe to share across threads.
class Problem {
 public:
  explicit Problem(const ProblemConfig& cfg);

  const ProblemConfig& config() const { return cfg_; }
  const GridSpec& grid() const { return cfg_.grid; }
  const RatesGrid& rates() const { return *rates_; }

  const std::vector<double>& wx() const { return wx_; }
  const std::vector<double>& wa() const { return wa_; }
  const std::vector<double>& wt() const { return wt_; }

  // node masks
  bool in_omega(int j) const { return omega_mask_[j] != 0; }
  bool in_omega1(int j) const { return omega1_mask_[j] != 0; }
  bool in_target_ages(int i) const { return age_mask_[i] != 0; }

  double k1_face(int j) const { return k1_faces_[j]; }
  double k2_face(int j) const { return k2_faces_[j]; }
  double k_face(int eq, int j) const { return eq == 1 ? k1_faces_[j] : k2_faces_[j]; }

  std::size_t idx(int n, int i, int j) const { return rates_->idx(n, i, j); }

 private:
  ProblemConfig cfg_;
  std::shared_ptr<const RatesGrid> rates_;
  std::vector<double> wx_, wa_, wt_;
  std::vector<char> omega_mask_, omega1_mask_, age_mask_;
  std::vector<double> k1_faces_, k2_faces_;
};

}  // namespace cascade
