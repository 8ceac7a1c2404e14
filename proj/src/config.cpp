// SPDX-License-Identifier: Apache-2.0
#include "cascade/config.hpp"

#include <cmath>
#include <sstream>

namespace cascade {

bool ValidationReport::pass() const {
  if (!structural_errors.empty()) return false;
  for (const auto& c : clauses)
    if (!c.pass) return false;
  return true;
}

const ClauseCheck* ValidationReport::find(const std::string& clause) const {
  for (const auto& c : clauses)
    if (c.clause == clause) return &c;
  return nullptr;
}

namespace {

void check_dispersion(const ProblemConfig& cfg, const DispersionSpec& k,
                      const std::string& tag, ValidationReport& rep) {
  std::ostringstream detail;

  // gamma range
  {
    ClauseCheck c{tag + ".gamma_range", k.gamma >= 0.0 && k.gamma < 1.0, ""};
    if (!c.pass) c.detail = "gamma must lie in [0,1)";
    rep.clauses.push_back(c);
  }

  // positivity on (0,1] and degeneracy at 0
  {
    bool positive = true;
    double worst_x = 0.0;
    for (int j = 1; j <= cfg.grid.n_x; ++j) {
      const double x = cfg.grid.x_node(j);
      if (!(k.value(x) > 0.0)) {
        positive = false;
        worst_x = x;
        break;
      }
    }
    ClauseCheck c{tag + ".positive", positive, ""};
    if (!positive) {
      std::ostringstream os;
      os << "k <= 0 at x = " << worst_x;
      c.detail = os.str();
    }
    rep.clauses.push_back(c);
  }
  {
    ClauseCheck c{tag + ".vanishes_at_0", true, ""};
    if (k.degenerate()) {
      c.pass = std::abs(k.value(0.0)) < 1e-12;
      if (!c.pass) c.detail = "degenerate kind must have k(0) = 0";
    } else {
      c.pass = false;
      c.detail = "constant kind is nondegenerate (cut-interval estimate regime only)";
    }
    rep.clauses.push_back(c);
  }

  // growth: x k'(x) <= gamma k(x) at every grid node
  {
    bool ok = true;
    double worst_margin = 0.0, worst_x = 0.0;
    for (int j = 1; j <= cfg.grid.n_x; ++j) {
      const double x = cfg.grid.x_node(j);
      const double lhs = x * k.derivative(x);
      const double rhs = k.gamma * k.value(x);
      const double margin = rhs - lhs;
      if (margin < worst_margin) {
        worst_margin = margin;
        worst_x = x;
        if (margin < -1e-10 * std::max(1.0, std::abs(rhs))) ok = false;
      }
    }
    ClauseCheck c{tag + ".growth", ok, ""};
    if (!ok) {
      std::ostringstream os;
      os << "x k'(x) > gamma k(x) at x = " << worst_x << " (margin " << worst_margin << ")";
      c.detail = os.str();
    }
    rep.clauses.push_back(c);
  }
}

}  // namespace

ValidationReport validate(const ProblemConfig& cfg) {
  ValidationReport rep;

  // ---- structural gate ----
  auto structural = [&](bool ok, const std::string& msg) {
    if (!ok) rep.structural_errors.push_back(msg);
  };
  structural(cfg.grid.n_x > 0 && cfg.grid.n_a > 0 && cfg.grid.n_t > 0,
             "grid counts must be positive");
  structural(cfg.time_horizon > 0.0, "T must be positive");
  structural(cfg.max_age > 0.0, "A must be positive");
  structural(cfg.omega.lo < cfg.omega.hi, "omega: x1 >= x2");
  structural(cfg.omega1.lo < cfg.omega1.hi, "omega1: x1 >= x2");
  structural(cfg.k1.kind != DispersionSpec::Kind::tabulated || !cfg.k1.face_values.empty(),
             "k1: empty table");
  structural(cfg.k2.kind != DispersionSpec::Kind::tabulated || !cfg.k2.face_values.empty(),
             "k2: empty table");
  if (!rep.structurally_sound()) return rep;

  // grid soundness is a hypothesis-level clause (named, not thrown)
  {
    ClauseCheck c{"grid.counts", cfg.grid.n_x >= 8 && cfg.grid.n_a >= 8 && cfg.grid.n_t >= 8, ""};
    if (!c.pass) c.detail = "axis counts must be >= 8";
    rep.clauses.push_back(c);
    ClauseCheck al{"grid.characteristic_alignment", cfg.grid.characteristic_aligned(), ""};
    if (!al.pass) {
      std::ostringstream os;
      os << "dt = " << cfg.grid.dt() << " but da = " << cfg.grid.da();
      al.detail = os.str();
    }
    rep.clauses.push_back(al);
  }

  // ---- geometry ----
  {
    ClauseCheck c{"geometry.time_before_cutoff",
                  cfg.time_horizon > 0.0 && cfg.time_horizon < cfg.age_cutoff &&
                      cfg.age_cutoff < cfg.max_age,
                  ""};
    if (!c.pass) c.detail = "need 0 < T < delta < A";
    rep.clauses.push_back(c);
  }
  {
    ClauseCheck c{"geometry.omega_in_domain",
                  cfg.omega.lo > 0.0 && cfg.omega.hi < 1.0, ""};
    if (!c.pass) c.detail = "omega must satisfy 0 < x1 < x2 < 1";
    rep.clauses.push_back(c);
  }
  {
    ClauseCheck c{"geometry.omega1_inside_omega",
                  cfg.omega1.strictly_inside(cfg.omega), ""};
    if (!c.pass) c.detail = "closure(omega1) must lie inside omega";
    rep.clauses.push_back(c);
  }
  {
    ClauseCheck c{"geometry.nu_positive", cfg.nu > 0.0, ""};
    if (!c.pass) c.detail = "nu must be positive";
    rep.clauses.push_back(c);
  }

  // ---- dispersion hypotheses ----
  check_dispersion(cfg, cfg.k1, "k1", rep);
  check_dispersion(cfg, cfg.k2, "k2", rep);

  // ---- rate hypotheses on the sampled grid ----
  if (!cfg.grid.characteristic_aligned() || cfg.grid.n_x < 8 || cfg.grid.n_a < 8 ||
      cfg.grid.n_t < 8) {
    // cannot sample a malformed grid; the clauses above already failed
    return rep;
  }
  const RatesGrid rg = RatesGrid::sample(cfg.rates, cfg.grid);
  struct Named {
    const char* name;
    const std::vector<double>* vals;
  };
  const Named rates[] = {{"mu1", &rg.mu1},
                         {"mu2", &rg.mu2},
                         {"mu3", &rg.mu3},
                         {"beta1", &rg.beta1},
                         {"beta2", &rg.beta2}};
  for (const auto& r : rates) {
    bool nonneg = true, bounded = true;
    for (double v : *r.vals) {
      if (!std::isfinite(v)) bounded = false;
      if (v < 0.0) nonneg = false;
    }
    ClauseCheck c{std::string("rates.") + r.name + ".nonnegative", nonneg, ""};
    if (!nonneg) c.detail = "negative sample on the grid";
    rep.clauses.push_back(c);
    ClauseCheck b{std::string("rates.") + r.name + ".bounded", bounded, ""};
    if (!bounded) b.detail = "non-finite sample on the grid";
    rep.clauses.push_back(b);
  }

  // newborn infertility: beta_i(t, 0, x) = 0
  for (int which = 0; which < 2; ++which) {
    const auto& tab = which == 0 ? rg.beta1 : rg.beta2;
    bool ok = true;
    for (int n = 0; n <= cfg.grid.n_t && ok; ++n)
      for (int j = 0; j <= cfg.grid.n_x && ok; ++j)
        if (std::abs(tab[rg.idx(n, 0, j)]) > 1e-14) ok = false;
    ClauseCheck c{std::string("rates.beta") + (which == 0 ? "1" : "2") + ".newborns_infertile",
                  ok, ""};
    if (!ok) c.detail = "beta(t, 0, x) != 0 somewhere";
    rep.clauses.push_back(c);
  }

  // interaction lower bound: mu3 >= nu on omega1
  {
    bool ok = true;
    double worst = 0.0;
    for (int n = 0; n <= cfg.grid.n_t && ok; ++n)
      for (int i = 0; i <= cfg.grid.n_a && ok; ++i)
        for (int j = 0; j <= cfg.grid.n_x; ++j) {
          if (!cfg.omega1.contains(cfg.grid.x_node(j))) continue;
          const double v = rg.mu3[rg.idx(n, i, j)];
          if (v < cfg.nu - 1e-14) {
            ok = false;
            worst = v;
            break;
          }
        }
    ClauseCheck c{"rates.mu3.lower_bound_on_omega1", ok, ""};
    if (!ok) {
      std::ostringstream os;
      os << "mu3 = " << worst << " < nu = " << cfg.nu << " inside omega1";
      c.detail = os.str();
    }
    rep.clauses.push_back(c);
  }

  // advisory flag, never fails the gate: tabulated rates may carry jumps
  for (const auto* rs : {&cfg.rates.mu1, &cfg.rates.mu2, &cfg.rates.mu3,
                         &cfg.rates.beta1, &cfg.rates.beta2}) {
    if (rs->kind == RateSpec::Kind::tabulated) {
      rep.clauses.push_back(
          {"rates.low_regularity_flag", true,
           "tabulated rate accepted; no smoothness claim for estimate constants"});
      break;
    }
  }

  return rep;
}

Problem::Problem(const ProblemConfig& cfg) : cfg_(cfg) {
  cfg_.grid.require_valid();
  rates_ = std::make_shared<const RatesGrid>(RatesGrid::sample(cfg_.rates, cfg_.grid));
  wx_ = quadrature_weights(cfg_.grid, Axis::x);
  wa_ = quadrature_weights(cfg_.grid, Axis::a);
  wt_ = quadrature_weights(cfg_.grid, Axis::t);

  omega_mask_.assign(cfg_.grid.n_x + 1, 0);
  omega1_mask_.assign(cfg_.grid.n_x + 1, 0);
  for (int j = 0; j <= cfg_.grid.n_x; ++j) {
    const double x = cfg_.grid.x_node(j);
    omega_mask_[j] = cfg_.omega.contains(x) ? 1 : 0;
    omega1_mask_[j] = cfg_.omega1.contains(x) ? 1 : 0;
  }
  age_mask_.assign(cfg_.grid.n_a + 1, 0);
  for (int i = 0; i <= cfg_.grid.n_a; ++i)
    age_mask_[i] = cfg_.grid.a_node(i) > cfg_.age_cutoff ? 1 : 0;

  k1_faces_.resize(cfg_.grid.n_x);
  k2_faces_.resize(cfg_.grid.n_x);
  for (int j = 0; j < cfg_.grid.n_x; ++j) {
    k1_faces_[j] = cfg_.k1.face(cfg_.grid, j);
    k2_faces_[j] = cfg_.k2.face(cfg_.grid, j);
  }
}

}  // namespace cascade
