// SPDX-License-Identifier: Apache-2.0
//
// Batch front end: config validation, cascade simulation, null-control
// synthesis, and inequality certification.  stdout carries only JSON on
// success; diagnostics go to stderr.  Exit codes: 0 success, 1 domain
// failure (hypothesis or convergence), 2 usage/parse failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "cascade/certify.hpp"
#include "cascade/control.hpp"
#include "cascade/io.hpp"
#include "cascade/solver.hpp"

namespace fs = std::filesystem;
using cascade::io::json;

namespace {

cascade::Field2D preset_field(const cascade::Problem& pb, const std::string& name,
                              bool second) {
  const cascade::GridSpec& g = pb.grid();
  cascade::Field2D f(g);
  auto bump = [&](double ca, double cx, double wa, double wx, double amp) {
    for (int i = 0; i <= g.n_a; ++i)
      for (int j = 1; j <= g.n_x - 1; ++j) {
        const double a = g.a_node(i), x = g.x_node(j);
        const double ea = (a - ca) / wa, ex = (x - cx) / wx;
        f.at(i, j) += amp * std::exp(-ea * ea - ex * ex);
      }
  };
  const double A = g.max_age;
  if (name == "zero") {
    return f;
  } else if (name == "gaussian-bump") {
    // one smooth bump for the controlled population; the cascade partner
    // starts at rest
    if (!second) bump(0.32 * A, 0.55, 0.13 * A, 0.12, 1.0);
    return f;
  } else if (name == "paired-bump") {
    if (!second)
      bump(0.32 * A, 0.55, 0.13 * A, 0.12, 1.0);
    else
      bump(0.40 * A, 0.55, 0.12 * A, 0.10, 0.3);
    return f;
  }
  throw cascade::Error("unknown initial-data preset '" + name + "'");
}

std::vector<double> parse_s_grid(const std::string& text) {
  // LO:HI:N, log-spaced
  double lo, hi;
  int n;
  char c1, c2;
  std::istringstream is(text);
  if (!(is >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':')
    throw cascade::Error("bad --s-grid, expected LO:HI:N");
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw cascade::Error("bad --s-grid range");
  std::vector<double> s(n);
  for (int k = 0; k < n; ++k)
    s[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
  return s;
}

int failure(const std::string& msg, int code) {
  std::cerr << "error: " << msg << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cascade population-control laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", preset = "gaussian-bump";
  std::string control_file, variants_arg =
      "renewal,localized,observability,hardy,caccioppoli,energy";
  std::string s_grid_arg = "1e-2:1e3:24";
  std::string slices_arg;
  double epsilon = 0.0;
  std::string sweep_arg;
  double tol = 1e-8;
  int max_iter = 2000;
  int draws = 10;
  std::uint64_t seed = 1;
  int threads = -1;  // -1: library default; 0: serial reference
  bool refine = false;

  app.add_option("--threads", threads,
                 "OpenMP threads (0 = serial reference path)");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "problem config JSON")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "random seed");
  };

  CLI::App* c_validate = app.add_subcommand("validate", "check the standing hypotheses");
  c_validate->add_option("--config", config_path)->required();

  CLI::App* c_sim = app.add_subcommand("simulate", "run the forward cascade system");
  add_common(c_sim);
  c_sim->add_option("--preset", preset, "initial data preset");
  c_sim->add_option("--control", control_file, "control CSV to apply");
  c_sim->add_option("--slices", slices_arg, "comma-separated time indices to export");

  CLI::App* c_ctl = app.add_subcommand("control", "synthesize the null control");
  add_common(c_ctl);
  c_ctl->add_option("--preset", preset, "initial data preset");
  c_ctl->add_option("--epsilon", epsilon, "penalty parameter");
  c_ctl->add_option("--sweep", sweep_arg, "comma-separated epsilon ladder");
  c_ctl->add_option("--tol", tol, "relative gradient tolerance");
  c_ctl->add_option("--max-iter", max_iter, "iteration cap");

  CLI::App* c_cert = app.add_subcommand("certify", "evaluate the inequality suite");
  add_common(c_cert);
  c_cert->add_option("--variants", variants_arg, "comma-separated list");
  c_cert->add_option("--s-grid", s_grid_arg, "LO:HI:N (log-spaced)");
  c_cert->add_option("--draws", draws, "random draws per study");
  c_cert->add_flag("--refine", refine, "re-run on a dyadically refined grid");

  CLI11_PARSE(app, argc, argv);

  if (threads == 0) {
    cascade::set_default_exec(cascade::Exec::serial);
  }
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    // ---------------- validate ----------------
    if (c_validate->parsed()) {
      cascade::ProblemConfig cfg;
      try {
        cfg = cascade::io::load_config(config_path);
      } catch (const cascade::Error& e) {
        return failure(e.what(), 2);
      }
      const cascade::ValidationReport rep = cascade::validate(cfg);
      std::cout << cascade::io::validation_to_json(rep).dump(2) << "\n";
      return rep.pass() ? 0 : 1;
    }

    // common setup for the run commands
    cascade::ProblemConfig cfg;
    try {
      cfg = cascade::io::load_config(config_path);
    } catch (const cascade::Error& e) {
      return failure(e.what(), 2);
    }
    fs::create_directories(out_dir);
    cascade::io::RunManifest man;
    man.config_hash = cascade::io::config_hash(cfg);
    man.code_version = cascade::io::code_version();
    man.seed = seed;
    man.started_at = cascade::io::now_iso8601();

    const cascade::Problem pb(cfg);

    // ---------------- simulate ----------------
    if (c_sim->parsed()) {
      man.command = "simulate";
      const cascade::Field2D y0 = preset_field(pb, preset, false);
      const cascade::Field2D p0 = preset_field(pb, preset, true);
      cascade::ControlField ctl(cfg.grid);
      if (!control_file.empty())
        ctl = cascade::io::read_control_csv(cfg.grid, control_file);
      ctl.mask_to_omega(pb);
      const cascade::ForwardTrajectory traj =
          cascade::solve_forward(pb, y0, p0, &ctl);
      const cascade::EnergyReport en = cascade::energy_check(pb, traj, &ctl, y0, p0);

      std::vector<int> slice_ids{0, cfg.grid.n_t / 2, cfg.grid.n_t};
      if (!slices_arg.empty()) {
        slice_ids.clear();
        std::istringstream is(slices_arg);
        std::string tok;
        while (std::getline(is, tok, ',')) slice_ids.push_back(std::stoi(tok));
      }
      json norms = json::array();
      for (int n = 0; n <= cfg.grid.n_t; ++n)
        norms.push_back({{"t", cfg.grid.t_node(n)},
                         {"y_l2", std::sqrt(traj.y[n].norm2(pb))},
                         {"p_l2", std::sqrt(traj.p[n].norm2(pb))}});
      for (int id : slice_ids) {
        if (id < 0 || id > cfg.grid.n_t)
          return failure("slice index out of range", 2);
        std::ostringstream ys, ps;
        ys << "y_slice_" << std::setw(4) << std::setfill('0') << id << ".csv";
        ps << "p_slice_" << std::setw(4) << std::setfill('0') << id << ".csv";
        cascade::io::write_field_csv(traj.y[id], fs::path(out_dir) / ys.str());
        cascade::io::write_field_csv(traj.p[id], fs::path(out_dir) / ps.str());
        man.outputs.push_back(ys.str());
        man.outputs.push_back(ps.str());
      }
      // terminal mass on the target ages: the uncontrolled baseline figure
      double terminal_mass = 0.0;
      {
        const cascade::Field2D& yT = traj.y.back();
        const cascade::Field2D& pT = traj.p.back();
        for (int i = 0; i <= cfg.grid.n_a; ++i) {
          if (!pb.in_target_ages(i)) continue;
          for (int j = 0; j <= cfg.grid.n_x; ++j)
            terminal_mass += pb.wa()[i] * pb.wx()[j] *
                             (yT.at(i, j) * yT.at(i, j) + pT.at(i, j) * pT.at(i, j));
        }
      }
      json summary{{"energy", cascade::io::energy_to_json(en)},
                   {"terminal_target_mass", terminal_mass},
                   {"slices", man.outputs}};
      {
        std::ofstream sfile(fs::path(out_dir) / "norms.json");
        sfile << json{{"grid", {{"n_x", cfg.grid.n_x}, {"n_a", cfg.grid.n_a},
                                 {"n_t", cfg.grid.n_t}}},
                      {"norms", norms}}
                     .dump(2)
              << "\n";
      }
      man.outputs.push_back("norms.json");
      man.finished_at = cascade::io::now_iso8601();
      cascade::io::write_manifest(man, fs::path(out_dir) / "manifest.json");
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    // ---------------- control ----------------
    if (c_ctl->parsed()) {
      man.command = "control";
      const cascade::Field2D y0 = preset_field(pb, preset, false);
      const cascade::Field2D p0 = preset_field(pb, preset, true);
      cascade::HumOptions opt;
      opt.tol = tol;
      opt.max_iter = max_iter;
      if (!sweep_arg.empty()) {
        std::vector<double> eps;
        std::istringstream is(sweep_arg);
        std::string tok;
        while (std::getline(is, tok, ',')) eps.push_back(std::stod(tok));
        const cascade::SweepReport rep = cascade::epsilon_sweep(pb, y0, p0, eps, opt);
        const json j = cascade::io::sweep_to_json(rep);
        {
          std::ofstream f(fs::path(out_dir) / "sweep.json");
          f << j.dump(2) << "\n";
        }
        man.outputs.push_back("sweep.json");
        man.finished_at = cascade::io::now_iso8601();
        cascade::io::write_manifest(man, fs::path(out_dir) / "manifest.json");
        std::cout << j.dump(2) << "\n";
        return rep.all_converged ? 0 : 1;
      }
      if (!(epsilon > 0.0))
        return failure("control: need --epsilon or --sweep", 2);
      opt.epsilon = epsilon;
      const cascade::HumResult res = cascade::minimize_J(pb, y0, p0, opt);
      cascade::io::write_control_csv(res.control, fs::path(out_dir) / "control.csv");
      man.outputs.push_back("control.csv");
      const json j = cascade::io::hum_to_json(res);
      {
        std::ofstream f(fs::path(out_dir) / "hum_result.json");
        f << j.dump(2) << "\n";
      }
      man.outputs.push_back("hum_result.json");
      man.finished_at = cascade::io::now_iso8601();
      cascade::io::write_manifest(man, fs::path(out_dir) / "manifest.json");
      std::cout << j.dump(2) << "\n";
      return res.converged ? 0 : 1;
    }

    // ---------------- certify ----------------
    if (c_cert->parsed()) {
      man.command = "certify";
      std::vector<double> s_grid;
      try {
        s_grid = parse_s_grid(s_grid_arg);
      } catch (const cascade::Error& e) {
        return failure(e.what(), 2);
      }
      if (s_grid.size() < 8) return failure("s-grid too small", 2);

      const cascade::WeightParams wp = cascade::default_weight_params(cfg);
      bool all_pass = true;
      json out = json::object();

      auto refined_problem = [&]() {
        cascade::ProblemConfig rc = cfg;
        rc.grid.n_x *= 2;
        rc.grid.n_a *= 2;
        rc.grid.n_t *= 2;
        return cascade::Problem(rc);
      };

      std::istringstream is(variants_arg);
      std::string name;
      while (std::getline(is, name, ',')) {
        if (name == "observability") {
          cascade::ObservabilityReport rep =
              cascade::observability_study(pb, draws, seed, false);
          bool ok = rep.all_finite && rep.draws - rep.vacuous > 0;
          if (refine) {
            const cascade::Problem rpb = refined_problem();
            const cascade::ObservabilityReport rr =
                cascade::observability_study(rpb, draws, seed, false);
            const double change =
                std::abs(rr.c_delta - rep.c_delta) / std::max(rep.c_delta, 1e-300);
            json jj = cascade::io::observability_to_json(rep);
            jj["refinement_change"] = change;
            ok = ok && change <= 0.25;
            jj["pass"] = ok;
            out["observability"] = jj;
          } else {
            json jj = cascade::io::observability_to_json(rep);
            jj["pass"] = ok;
            out["observability"] = jj;
          }
          all_pass = all_pass && ok;
        } else if (name == "hardy") {
          const cascade::HardyResult h1 =
              cascade::hardy_poincare_constant(cfg.k1, cfg.grid);
          const cascade::HardyResult h2 =
              cascade::hardy_poincare_constant(cfg.k2, cfg.grid);
          const bool ok = std::isfinite(h1.constant) && std::isfinite(h2.constant);
          out["hardy"] = json{{"k1_constant", h1.constant},
                              {"k2_constant", h2.constant},
                              {"k1_iterations", h1.iterations},
                              {"k2_iterations", h2.iterations},
                              {"pass", ok}};
          all_pass = all_pass && ok;
        } else if (name == "caccioppoli") {
          std::mt19937_64 rng(seed);
          const cascade::Field2D uT = cascade::random_bump_field(pb, rng, false);
          const cascade::Field2D vT = cascade::random_bump_field(pb, rng, false);
          const cascade::Field2D h1f = cascade::random_bump_field(pb, rng, false);
          const cascade::Field2D h2f = cascade::random_bump_field(pb, rng, false);
          cascade::SourcePair sp;
          const auto& g = cfg.grid;
          sp.h1.resize(static_cast<std::size_t>(g.n_t + 1) * (g.n_a + 1) * (g.n_x + 1));
          sp.h2.resize(sp.h1.size());
          for (int n = 0; n <= g.n_t; ++n)
            for (int i = 0; i <= g.n_a; ++i)
              for (int j = 0; j <= g.n_x; ++j) {
                sp.h1[pb.idx(n, i, j)] = h1f.at(i, j);
                sp.h2[pb.idx(n, i, j)] = h2f.at(i, j);
              }
          cascade::AdjointSources src;
          src.mode = cascade::AdjointSources::Mode::fields;
          src.h1 = &sp.h1;
          src.h2 = &sp.h2;
          const cascade::AdjointTrajectory traj =
              cascade::solve_adjoint(pb, uT, vT, src);
          const cascade::Interval omega = cfg.omega;
          const double third = omega.length() / 3.0;
          const cascade::Interval omega_prime{omega.lo + third, omega.hi - third};
          const cascade::CaccioppoliResult cr =
              cascade::caccioppoli_check(pb, traj, sp, wp, omega_prime);
          const bool ok = std::isfinite(cr.weight1.ratio) &&
                          std::isfinite(cr.weight2.ratio);
          out["caccioppoli"] =
              json{{"weight1",
                    {{"lhs", cr.weight1.lhs}, {"rhs", cr.weight1.rhs},
                     {"ratio", cr.weight1.ratio}}},
                   {"weight2",
                    {{"lhs", cr.weight2.lhs}, {"rhs", cr.weight2.rhs},
                     {"ratio", cr.weight2.ratio}}},
                   {"pass", ok}};
          all_pass = all_pass && ok;
        } else if (name == "energy") {
          std::mt19937_64 rng(seed);
          const cascade::Field2D y0 = cascade::random_bump_field(pb, rng, false);
          const cascade::Field2D p0 = cascade::random_bump_field(pb, rng, false);
          const cascade::ForwardTrajectory traj =
              cascade::solve_forward(pb, y0, p0, nullptr);
          const cascade::EnergyReport en =
              cascade::energy_check(pb, traj, nullptr, y0, p0);
          const bool ok = en.vacuous || std::isfinite(en.ratio);
          json jj = cascade::io::energy_to_json(en);
          jj["pass"] = ok;
          out["energy"] = jj;
          all_pass = all_pass && ok;
        } else {
          const auto variant = cascade::variant_from_name(name);
          if (!variant.has_value())
            return failure("unknown certify variant '" + name + "'", 2);
          cascade::ScanOptions so;
          so.s_grid = s_grid;
          so.n_draws = draws;
          so.seed = seed;
          cascade::CertReport rep = cascade::scan_s(pb, *variant, wp, so);
          if (refine) {
            const cascade::Problem rpb = refined_problem();
            const cascade::WeightParams rwp =
                cascade::default_weight_params(rpb.config());
            const cascade::CertReport rr = cascade::scan_s(rpb, *variant, rwp, so);
            const double change = std::abs(rr.fitted_C - rep.fitted_C) /
                                  std::max(rep.fitted_C, 1e-300);
            rep.refinement_change = change;
            rep.pass = rep.pass && rr.pass && change <= 0.25;
          }
          cascade::io::write_cert_csv(
              rep, fs::path(out_dir) / ("cert_" + name + ".csv"));
          man.outputs.push_back("cert_" + name + ".csv");
          out[name] = cascade::io::cert_to_json(rep);
          all_pass = all_pass && rep.pass;
        }
      }

      out["all_pass"] = all_pass;
      {
        std::ofstream f(fs::path(out_dir) / "certify.json");
        f << out.dump(2) << "\n";
      }
      man.outputs.push_back("certify.json");
      man.finished_at = cascade::io::now_iso8601();
      cascade::io::write_manifest(man, fs::path(out_dir) / "manifest.json");
      std::cout << out.dump(2) << "\n";
      return all_pass ? 0 : 1;
    }
  } catch (const cascade::Error& e) {
    return failure(e.what(), 1);
  } catch (const std::exception& e) {
    return failure(e.what(), 1);
  }
  return 2;
}
