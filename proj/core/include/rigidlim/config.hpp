#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rigidlim/ifs.hpp"

namespace rigidlim {

/// One entry of the "maps" list: either a similarity given by its parts,
/// or a conjugated family wrapping a list of similarities.
struct MapSpec {
  std::string kind;  // "similarity" | "conjugated"

  // similarity
  double scale = 0.0;
  std::vector<double> orthogonal;   // row-major d x d
  std::vector<double> translation;  // d entries

  // conjugated
  std::vector<MapSpec> base;
  double c2 = 1.0;
  int grid_resolution = 24;
};

struct SystemConfig {
  int d = 0;
  int alphabet_size = 0;
  std::vector<MapSpec> maps;
  std::vector<double> seed_min;
  std::vector<double> seed_max;
  double omega_margin = 0.0;
  double s_low = 0.0;
  double s_up = 0.0;
  std::optional<double> rho0;

  bool conjugated() const {
    return maps.size() == 1 && maps.front().kind == "conjugated";
  }
};

/// Strict parse: unknown fields, wrong types, and invariant violations
/// all raise ConfigError naming the offending field.
SystemConfig parse_system_config(const std::string& json_text);
SystemConfig load_system_config(const std::string& path);

/// Instantiates the system; conjugated configs run the norm-product gate
/// and may throw ConstructionRejectedError.
struct BuiltSystem {
  IFSystem system;
  std::optional<HOletusCheck> h_check;  // present for conjugated configs
};

BuiltSystem build_system(const SystemConfig& config);

/// Stable digest of the parsed config (FNV-1a over a canonical rendering),
/// echoed in reports so runs can be matched to inputs.
std::string config_digest(const SystemConfig& config);

}  // namespace rigidlim
