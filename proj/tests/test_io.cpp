// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "cascade/io.hpp"
#include "test_support.hpp"

using namespace cascade;
namespace fs = std::filesystem;

namespace {
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("cascade_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};
}  // namespace

TEST_CASE("config JSON round trip is canonical") {
  const auto cfg = testsup::desk_config();
  const auto text = io::canonical_config_text(cfg);
  const auto parsed = io::config_from_json(io::json::parse(text));
  CHECK(io::canonical_config_text(parsed) == text);
  CHECK(io::config_hash(parsed) == io::config_hash(cfg));

  auto other = cfg;
  other.nu = 2.0;
  CHECK(io::config_hash(other) != io::config_hash(cfg));
}

TEST_CASE("malformed configs are parse errors") {
  CHECK_THROWS_AS(io::config_from_json(io::json::parse("{}")), Error);
  auto j = io::config_to_json(testsup::desk_config());
  j["schema_version"] = 999;
  CHECK_THROWS_AS(io::config_from_json(j), Error);
  j = io::config_to_json(testsup::desk_config());
  j["k1"]["kind"] = "mystery";
  CHECK_THROWS_AS(io::config_from_json(j), Error);
}

TEST_CASE("control CSV round trip is exact") {
  TempDir tmp;
  const Problem pb(testsup::desk_config(50));
  const GridSpec& g = pb.grid();
  ControlField c(g);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int n = 0; n <= g.n_t; ++n)
    for (int i = 0; i <= g.n_a; ++i)
      for (int j = 1; j < g.n_x; ++j)
        if (pb.in_omega(j)) c.at(n, i, j) = nd(rng);
  const auto path = tmp.path / "control.csv";
  io::write_control_csv(c, path);
  const ControlField back = io::read_control_csv(g, path);
  CHECK(back.data() == c.data());
}

TEST_CASE("shipped presets: valid ones pass, mutants fail on their clause") {
  const fs::path presets = fs::path(PRESET_DIR);
  const char* good[] = {"default.json", "power_half.json"};
  for (const char* name : good) {
    const auto cfg = io::load_config(presets / name);
    const auto rep = validate(cfg);
    INFO(name);
    CHECK(rep.pass());
  }
  const std::pair<const char*, const char*> mutants[] = {
      {"mutants/fertile_newborns.json", "rates.beta1.newborns_infertile"},
      {"mutants/negative_rate.json", "rates.mu2.nonnegative"},
      {"mutants/weak_interaction.json", "rates.mu3.lower_bound_on_omega1"},
      {"mutants/late_horizon.json", "geometry.time_before_cutoff"},
      {"mutants/steep_dispersion.json", "k1.growth"},
      {"mutants/window_leak.json", "geometry.omega1_inside_omega"},
  };
  for (const auto& [name, clause] : mutants) {
    const auto cfg = io::load_config(presets / name);
    const auto rep = validate(cfg);
    INFO(name, " -> ", clause);
    CHECK_FALSE(rep.pass());
    const auto* c = rep.find(clause);
    REQUIRE(c != nullptr);
    CHECK_FALSE(c->pass);
  }
}

TEST_CASE("field and certification CSV smoke") {
  TempDir tmp;
  const Problem pb(testsup::desk_config(50));
  const Field2D f = testsup::gaussian_bump(pb.grid(), 0.3, 0.5, 0.2, 0.2);
  io::write_field_csv(f, tmp.path / "f.csv");
  CHECK(fs::file_size(tmp.path / "f.csv") > 0);

  CertReport rep;
  rep.inequality = "renewal";
  rep.s_values = {1.0, 2.0};
  rep.per_s.resize(2);
  rep.per_s[0] = {1.0, 1.0, 2.0, 0.5, 0.0, std::log(2.0), false};
  rep.per_s[1] = {2.0, 1.0, 2.0, 0.5, 0.0, std::log(2.0), false};
  io::write_cert_csv(rep, tmp.path / "cert.csv");
  std::ifstream in(tmp.path / "cert.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "s,lhs,rhs,ratio,log_lhs,log_rhs");
}

TEST_CASE("weight snapshot export") {
  TempDir tmp;
  const Problem pb(testsup::desk_config(20));
  const auto wp = default_weight_params(pb.config());
  io::write_weights_csv(pb, wp, tmp.path / "weights.csv");
  std::ifstream in(tmp.path / "weights.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,a,x,theta,psi1,psi2,sigma,Psi,phi1,phi2,Phi,small_phi");
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  const GridSpec& g = pb.grid();
  CHECK(lines == (g.n_t - 1) * g.n_a * (g.n_x + 1));
}

TEST_CASE("manifest carries the run fingerprint") {
  TempDir tmp;
  io::RunManifest m;
  m.command = "simulate";
  m.config_hash = "deadbeef";
  m.code_version = io::code_version();
  m.started_at = io::now_iso8601();
  m.finished_at = io::now_iso8601();
  m.outputs = {"a.csv", "b.csv"};
  m.seed = 7;
  io::write_manifest(m, tmp.path / "manifest.json");
  std::ifstream in(tmp.path / "manifest.json");
  io::json j;
  in >> j;
  CHECK(j.at("command") == "simulate");
  CHECK(j.at("config_hash") == "deadbeef");
  CHECK(j.at("outputs").size() == 2);
  CHECK(j.at("seed") == 7);
}
