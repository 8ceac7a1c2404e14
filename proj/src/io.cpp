// SPDX-License-Identifier: Apache-2.0
#include "cascade/io.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace cascade::io {

namespace {

RateSpec rate_from_json(const json& j) {
  RateSpec r;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    r.kind = RateSpec::Kind::constant;
    r.value = j.at("value").get<double>();
  } else if (kind == "ramp_age") {
    r.kind = RateSpec::Kind::ramp_age;
    r.value = j.at("value").get<double>();
  } else if (kind == "smoothstep_age") {
    r.kind = RateSpec::Kind::smoothstep_age;
    r.value = j.at("value").get<double>();
    r.a0 = j.at("a0").get<double>();
    r.a1 = j.at("a1").get<double>();
  } else if (kind == "tabulated") {
    r.kind = RateSpec::Kind::tabulated;
    r.tab_nt = j.at("n_t").get<int>();
    r.tab_na = j.at("n_a").get<int>();
    r.tab_nx = j.at("n_x").get<int>();
    r.table = j.at("values").get<std::vector<double>>();
    const std::size_t want = static_cast<std::size_t>(r.tab_nt + 1) *
                             (r.tab_na + 1) * (r.tab_nx + 1);
    if (r.table.size() != want)
      throw Error("config: tabulated rate has wrong sample count");
  } else {
    throw Error("config: unknown rate kind '" + kind + "'");
  }
  return r;
}

json rate_to_json(const RateSpec& r) {
  json j;
  j["kind"] = r.kind_name();
  switch (r.kind) {
    case RateSpec::Kind::constant:
    case RateSpec::Kind::ramp_age:
      j["value"] = r.value;
      break;
    case RateSpec::Kind::smoothstep_age:
      j["value"] = r.value;
      j["a0"] = r.a0;
      j["a1"] = r.a1;
      break;
    case RateSpec::Kind::tabulated:
      j["n_t"] = r.tab_nt;
      j["n_a"] = r.tab_na;
      j["n_x"] = r.tab_nx;
      j["values"] = r.table;
      break;
  }
  return j;
}

DispersionSpec dispersion_from_json(const json& j) {
  DispersionSpec k;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "power") {
    k.kind = DispersionSpec::Kind::power;
    k.alpha = j.at("alpha").get<double>();
  } else if (kind == "constant") {
    k.kind = DispersionSpec::Kind::constant;
    k.c = j.at("c").get<double>();
  } else if (kind == "tabulated") {
    k.kind = DispersionSpec::Kind::tabulated;
    k.face_values = j.at("values").get<std::vector<double>>();
  } else {
    throw Error("config: unknown dispersion kind '" + kind + "'");
  }
  k.gamma = j.at("gamma").get<double>();
  return k;
}

json dispersion_to_json(const DispersionSpec& k) {
  json j;
  j["kind"] = k.kind_name();
  j["gamma"] = k.gamma;
  switch (k.kind) {
    case DispersionSpec::Kind::power: j["alpha"] = k.alpha; break;
    case DispersionSpec::Kind::constant: j["c"] = k.c; break;
    case DispersionSpec::Kind::tabulated: j["values"] = k.face_values; break;
  }
  return j;
}

}  // namespace

ProblemConfig config_from_json(const json& j) {
  try {
    ProblemConfig cfg;
    cfg.schema_version = j.at("schema_version").get<int>();
    if (cfg.schema_version != 1)
      throw Error("config: unsupported schema_version " +
                  std::to_string(cfg.schema_version));
    cfg.time_horizon = j.at("time_horizon").get<double>();
    cfg.max_age = j.at("max_age").get<double>();
    cfg.age_cutoff = j.at("age_cutoff").get<double>();
    const auto om = j.at("omega").get<std::vector<double>>();
    const auto om1 = j.at("omega1").get<std::vector<double>>();
    if (om.size() != 2 || om1.size() != 2)
      throw Error("config: omega/omega1 must be [lo, hi]");
    cfg.omega = {om[0], om[1]};
    cfg.omega1 = {om1[0], om1[1]};
    cfg.nu = j.at("nu").get<double>();
    const json& g = j.at("grid");
    cfg.grid.n_x = g.at("n_x").get<int>();
    cfg.grid.n_a = g.at("n_a").get<int>();
    cfg.grid.n_t = g.at("n_t").get<int>();
    cfg.grid.time_horizon = cfg.time_horizon;
    cfg.grid.max_age = cfg.max_age;
    cfg.k1 = dispersion_from_json(j.at("k1"));
    cfg.k2 = dispersion_from_json(j.at("k2"));
    const json& r = j.at("rates");
    cfg.rates.mu1 = rate_from_json(r.at("mu1"));
    cfg.rates.mu2 = rate_from_json(r.at("mu2"));
    cfg.rates.mu3 = rate_from_json(r.at("mu3"));
    cfg.rates.beta1 = rate_from_json(r.at("beta1"));
    cfg.rates.beta2 = rate_from_json(r.at("beta2"));
    return cfg;
  } catch (const json::exception& e) {
    throw Error(std::string("config: malformed document: ") + e.what());
  }
}

json config_to_json(const ProblemConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["time_horizon"] = cfg.time_horizon;
  j["max_age"] = cfg.max_age;
  j["age_cutoff"] = cfg.age_cutoff;
  j["omega"] = {cfg.omega.lo, cfg.omega.hi};
  j["omega1"] = {cfg.omega1.lo, cfg.omega1.hi};
  j["nu"] = cfg.nu;
  j["grid"] = {{"n_x", cfg.grid.n_x}, {"n_a", cfg.grid.n_a}, {"n_t", cfg.grid.n_t}};
  j["k1"] = dispersion_to_json(cfg.k1);
  j["k2"] = dispersion_to_json(cfg.k2);
  j["rates"] = {{"mu1", rate_to_json(cfg.rates.mu1)},
                {"mu2", rate_to_json(cfg.rates.mu2)},
                {"mu3", rate_to_json(cfg.rates.mu3)},
                {"beta1", rate_to_json(cfg.rates.beta1)},
                {"beta2", rate_to_json(cfg.rates.beta2)}};
  return j;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(std::string("config: JSON parse failure: ") + e.what());
  }
  return config_from_json(j);
}

void save_config(const ProblemConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("config: cannot write " + path.string());
  out << canonical_config_text(cfg);
}

std::string canonical_config_text(const ProblemConfig& cfg) {
  return config_to_json(cfg).dump(2) + "\n";
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const ProblemConfig& cfg) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0')
     << fnv1a64(canonical_config_text(cfg));
  return os.str();
}

json validation_to_json(const ValidationReport& rep) {
  json j;
  j["pass"] = rep.pass();
  j["structural_errors"] = rep.structural_errors;
  json clauses = json::array();
  for (const auto& c : rep.clauses)
    clauses.push_back({{"clause", c.clause}, {"pass", c.pass}, {"detail", c.detail}});
  j["clauses"] = clauses;
  return j;
}

json energy_to_json(const EnergyReport& rep) {
  return json{{"sup_t", rep.sup_t},
              {"sup_a", rep.sup_a},
              {"gradient_term", rep.gradient_term},
              {"control_term", rep.control_term},
              {"data_term", rep.data_term},
              {"lhs", rep.lhs},
              {"rhs", rep.rhs},
              {"ratio", rep.ratio},
              {"vacuous", rep.vacuous}};
}

json hum_to_json(const HumResult& res) {
  return json{{"epsilon", res.epsilon},
              {"iterations", res.iterations},
              {"converged", res.converged},
              {"terminal_residual_y", res.terminal_residual_y},
              {"terminal_residual_p", res.terminal_residual_p},
              {"young_residual", res.young_residual},
              {"control_energy", res.control_energy},
              {"optimality_gap", res.optimality_gap},
              {"certificate", res.certificate},
              {"J_history", res.J_history}};
}

json sweep_to_json(const SweepReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"epsilon", r.epsilon},
                    {"residual_y", r.residual_y},
                    {"residual_p", r.residual_p},
                    {"residual_total", r.residual_total},
                    {"residual_over_epsilon", r.residual_over_epsilon},
                    {"control_energy", r.control_energy},
                    {"energy_over_data", r.energy_over_data},
                    {"iterations", r.iterations},
                    {"converged", r.converged}});
  return json{{"rows", rows},
              {"all_converged", rep.all_converged},
              {"residuals_nonincreasing", rep.residuals_nonincreasing},
              {"residual_over_eps_spread", rep.residual_over_eps_spread},
              {"energy_spread", rep.energy_spread},
              {"energy_within_2x", rep.energy_within_2x},
              {"data_norm2", rep.data_norm2}};
}

namespace {
json entry_to_json(const CertEntry& e) {
  return json{{"s", e.s},
              {"lhs", e.lhs},
              {"rhs", e.rhs},
              {"ratio", e.ratio},
              {"log_lhs", std::isfinite(e.log_lhs) ? json(e.log_lhs) : json()},
              {"log_rhs", std::isfinite(e.log_rhs) ? json(e.log_rhs) : json()},
              {"vacuous", e.vacuous}};
}
}  // namespace

json cert_to_json(const CertReport& rep) {
  json per_s = json::array();
  for (const auto& e : rep.per_s) per_s.push_back(entry_to_json(e));
  json j{{"inequality", rep.inequality},
         {"s_values", rep.s_values},
         {"per_s", per_s},
         {"fitted_C", rep.fitted_C},
         {"empirical_s0", rep.s0_found ? json(rep.empirical_s0) : json()},
         {"s0_found", rep.s0_found},
         {"diverging", rep.diverging},
         {"pass", rep.pass},
         {"note", rep.note}};
  if (rep.refinement_change.has_value())
    j["refinement_change"] = *rep.refinement_change;
  return j;
}

json observability_to_json(const ObservabilityReport& rep) {
  return json{{"c_delta", rep.c_delta},
              {"draws", rep.draws},
              {"vacuous", rep.vacuous},
              {"all_finite", rep.all_finite},
              {"quotients", rep.quotients}};
}

namespace {
std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("io: cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}
}  // namespace

void write_field_csv(const Field2D& f, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (int i = 0; i <= f.n_a(); ++i) {
    for (int j = 0; j <= f.n_x(); ++j) {
      if (j) out << ',';
      out << f.at(i, j);
    }
    out << '\n';
  }
}

void write_control_csv(const ControlField& c, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t_index,a_index,x_index,value\n";
  for (int n = 0; n <= c.n_t(); ++n)
    for (int i = 0; i <= c.n_a(); ++i)
      for (int j = 0; j <= c.n_x(); ++j) {
        const double v = c.at(n, i, j);
        if (v != 0.0) out << n << ',' << i << ',' << j << ',' << v << '\n';
      }
}

ControlField read_control_csv(const GridSpec& grid, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io: cannot open " + path.string());
  ControlField c(grid);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int n, i, j;
    double v;
    char comma;
    if (!(ls >> n >> comma >> i >> comma >> j >> comma >> v))
      throw Error("io: malformed control CSV line: " + line);
    if (n < 0 || n > grid.n_t || i < 0 || i > grid.n_a || j < 0 || j > grid.n_x)
      throw Error("io: control CSV index out of range: " + line);
    c.at(n, i, j) = v;
  }
  return c;
}

void write_cert_csv(const CertReport& rep, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "s,lhs,rhs,ratio,log_lhs,log_rhs\n";
  for (const auto& e : rep.per_s)
    out << e.s << ',' << e.lhs << ',' << e.rhs << ',' << e.ratio << ','
        << e.log_lhs << ',' << e.log_rhs << '\n';
}

void write_weights_csv(const Problem& pb, const WeightParams& wp,
                       const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t,a,x,theta,psi1,psi2,sigma,Psi,phi1,phi2,Phi,small_phi\n";
  const GridSpec& g = pb.grid();
  for (int n = 1; n < g.n_t; ++n)
    for (int i = 1; i <= g.n_a; ++i)
      for (int j = 0; j <= g.n_x; ++j) {
        const WeightValues w =
            weights_at(g.t_node(n), g.a_node(i), g.x_node(j), wp,
                       pb.config().k1, pb.config().k2, g.time_horizon);
        out << g.t_node(n) << ',' << g.a_node(i) << ',' << g.x_node(j) << ','
            << w.theta << ',' << w.psi1 << ',' << w.psi2 << ',' << w.sigma << ','
            << w.Psi << ',' << w.phi1 << ',' << w.phi2 << ',' << w.Phi << ','
            << w.small_phi << '\n';
      }
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  json j{{"command", m.command},
         {"config_hash", m.config_hash},
         {"code_version", m.code_version},
         {"started_at", m.started_at},
         {"finished_at", m.finished_at},
         {"outputs", m.outputs},
         {"seed", m.seed}};
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string code_version() { return "0.1.0"; }

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace cascade::io
