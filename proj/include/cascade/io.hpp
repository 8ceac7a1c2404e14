// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cascade/certify.hpp"
#include "cascade/control.hpp"
#include "cascade/field.hpp"
#include "cascade/weights.hpp"

#include <json.hpp>

namespace cascade::io {

using json = nlohmann::json;

/// Config <-> JSON.  Parsing throws cascade::Error on malformed or
/// schema-incompatible documents; range violations are left to validate().
ProblemConfig config_from_json(const json& j);
json config_to_json(const ProblemConfig& cfg);
ProblemConfig load_config(const std::filesystem::path& path);
void save_config(const ProblemConfig& cfg, const std::filesystem::path& path);

/// Canonical serialization used for hashing (sorted keys, 2-space indent).
std::string canonical_config_text(const ProblemConfig& cfg);
std::uint64_t fnv1a64(const std::string& bytes);
std::string config_hash(const ProblemConfig& cfg);

json validation_to_json(const ValidationReport& rep);
json energy_to_json(const EnergyReport& rep);
json hum_to_json(const HumResult& res);
json sweep_to_json(const SweepReport& rep);
json cert_to_json(const CertReport& rep);
json observability_to_json(const ObservabilityReport& rep);

/// Field slice as a plain numeric CSV matrix (rows: age nodes, cols: x nodes).
void write_field_csv(const Field2D& f, const std::filesystem::path& path);

/// Sparse control CSV: t_index,a_index,x_index,value (nonzero entries only).
void write_control_csv(const ControlField& c, const std::filesystem::path& path);
ControlField read_control_csv(const GridSpec& grid, const std::filesystem::path& path);

/// Per-s certification CSV: s,lhs,rhs,ratio,log_lhs,log_rhs.
void write_cert_csv(const CertReport& rep, const std::filesystem::path& path);

/// Weight snapshot along the grid for plotting:
/// t,a,x,theta,psi1,psi2,sigma,Psi,phi1,phi2,Phi,small_phi.
void write_weights_csv(const Problem& pb, const WeightParams& wp,
                       const std::filesystem::path& path);

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::string code_version;
  std::string started_at, finished_at;  // ISO-8601, UTC
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
};
void write_manifest(const RunManifest& m, const std::filesystem::path& path);

std::string code_version();
std::string now_iso8601();

}  // namespace cascade::io
