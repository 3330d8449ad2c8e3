#include "rigidlim/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace rigidlim {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object())
    throw ConfigError(where + ": expected a JSON object");
  for (const char* key : required) {
    if (!obj.contains(key))
      throw ConfigError(where + ": missing field '" + key + "'");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : required) known = known || it.key() == key;
    for (const char* key : optional) known = known || it.key() == key;
    if (!known)
      throw ConfigError(where + ": unknown field '" + it.key() + "'");
  }
}

double as_number(const json& value, const std::string& where) {
  if (!value.is_number())
    throw ConfigError(where + ": expected a number");
  return value.get<double>();
}

int as_int(const json& value, const std::string& where) {
  if (!value.is_number_integer())
    throw ConfigError(where + ": expected an integer");
  return value.get<int>();
}

std::vector<double> as_vector(const json& value, std::size_t n,
                              const std::string& where) {
  if (!value.is_array() || value.size() != n)
    throw ConfigError(where + ": expected an array of " + std::to_string(n) +
                      " numbers");
  std::vector<double> out;
  out.reserve(n);
  for (const auto& entry : value) out.push_back(as_number(entry, where));
  return out;
}

MapSpec parse_similarity(const json& obj, int d, const std::string& where) {
  require_keys(obj, where, {"kind", "scale", "orthogonal", "translation"});
  MapSpec spec;
  spec.kind = "similarity";
  spec.scale = as_number(obj["scale"], where + ".scale");
  if (spec.scale <= 0.0 || spec.scale >= 1.0)
    throw ConfigError(where + ".scale: must lie in (0,1)");
  spec.orthogonal =
      as_vector(obj["orthogonal"], std::size_t(d) * std::size_t(d),
                where + ".orthogonal");
  spec.translation = as_vector(obj["translation"], std::size_t(d),
                               where + ".translation");
  return spec;
}

MapSpec parse_map(const json& obj, int d, const std::string& where) {
  if (!obj.is_object() || !obj.contains("kind"))
    throw ConfigError(where + ": map spec needs a 'kind' field");
  const std::string kind = obj["kind"].get<std::string>();
  if (kind == "similarity") return parse_similarity(obj, d, where);
  if (kind == "conjugated") {
    require_keys(obj, where, {"kind", "base", "c2"}, {"grid_resolution"});
    MapSpec spec;
    spec.kind = "conjugated";
    spec.c2 = as_number(obj["c2"], where + ".c2");
    if (spec.c2 <= 1.0)
      throw ConfigError(where + ".c2: must exceed 1");
    if (obj.contains("grid_resolution")) {
      spec.grid_resolution =
          as_int(obj["grid_resolution"], where + ".grid_resolution");
      if (spec.grid_resolution < 2)
        throw ConfigError(where + ".grid_resolution: must be at least 2");
    }
    if (!obj["base"].is_array() || obj["base"].empty())
      throw ConfigError(where + ".base: expected a nonempty array");
    int k = 0;
    for (const auto& entry : obj["base"]) {
      spec.base.push_back(parse_map(entry, d,
                                    where + ".base[" + std::to_string(k) +
                                        "]"));
      if (spec.base.back().kind != "similarity")
        throw ConfigError(where + ".base: only similarity entries allowed");
      ++k;
    }
    return spec;
  }
  throw ConfigError(where + ".kind: unknown kind '" + kind + "'");
}

Mat to_matrix(const std::vector<double>& row_major, int d) {
  Mat m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = row_major[std::size_t(r * d + c)];
  return m;
}

Vec to_vector(const std::vector<double>& values) {
  Vec v(static_cast<int>(values.size()));
  for (int k = 0; k < v.size(); ++k) v[k] = values[std::size_t(k)];
  return v;
}

std::vector<MapPtr> instantiate_similarities(const std::vector<MapSpec>& specs,
                                             int d) {
  std::vector<MapPtr> maps;
  maps.reserve(specs.size());
  for (const MapSpec& spec : specs) {
    maps.push_back(std::make_shared<Similarity>(
        spec.scale, to_matrix(spec.orthogonal, d), to_vector(spec.translation)));
  }
  return maps;
}

}  // namespace

SystemConfig parse_system_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  require_keys(root, "config",
               {"d", "alphabet_size", "maps", "seed_box", "omega_margin",
                "s_low", "s_up"},
               {"rho0"});
  SystemConfig config;
  config.d = as_int(root["d"], "d");
  if (config.d < 1) throw ConfigError("d: must be at least 1");
  config.alphabet_size = as_int(root["alphabet_size"], "alphabet_size");
  if (config.alphabet_size < 2)
    throw ConfigError("alphabet_size: must be at least 2");

  if (!root["maps"].is_array() || root["maps"].empty())
    throw ConfigError("maps: expected a nonempty array");
  int k = 0;
  for (const auto& entry : root["maps"]) {
    config.maps.push_back(
        parse_map(entry, config.d, "maps[" + std::to_string(k) + "]"));
    ++k;
  }
  // A conjugated family is a single entry carrying the whole alphabet.
  const std::size_t effective = config.conjugated()
                                    ? config.maps.front().base.size()
                                    : config.maps.size();
  if (effective != std::size_t(config.alphabet_size))
    throw ConfigError("maps: count " + std::to_string(effective) +
                      " does not match alphabet_size " +
                      std::to_string(config.alphabet_size));
  if (!config.conjugated()) {
    for (const MapSpec& spec : config.maps) {
      if (spec.kind != "similarity")
        throw ConfigError(
            "maps: a conjugated spec must be the only entry in the list");
    }
  }

  require_keys(root["seed_box"], "seed_box", {"min", "max"});
  config.seed_min = as_vector(root["seed_box"]["min"], std::size_t(config.d),
                              "seed_box.min");
  config.seed_max = as_vector(root["seed_box"]["max"], std::size_t(config.d),
                              "seed_box.max");
  for (int i = 0; i < config.d; ++i) {
    if (!(config.seed_min[std::size_t(i)] < config.seed_max[std::size_t(i)]))
      throw ConfigError("seed_box: degenerate along coordinate " +
                        std::to_string(i));
  }
  config.omega_margin = as_number(root["omega_margin"], "omega_margin");
  if (config.omega_margin <= 0.0)
    throw ConfigError("omega_margin: must be positive");
  config.s_low = as_number(root["s_low"], "s_low");
  config.s_up = as_number(root["s_up"], "s_up");
  if (config.s_low <= 0.0 || config.s_up >= 1.0 || config.s_low > config.s_up)
    throw ConfigError("s_low/s_up: need 0 < s_low <= s_up < 1");
  if (config.s_up * config.s_up > config.s_low + 1e-12)
    throw ConfigError("s_low/s_up: need s_up^2 <= s_low");
  if (root.contains("rho0")) {
    config.rho0 = as_number(root["rho0"], "rho0");
    if (*config.rho0 <= 0.0) throw ConfigError("rho0: must be positive");
  }
  return config;
}

SystemConfig load_system_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_system_config(buffer.str());
}

BuiltSystem build_system(const SystemConfig& config) {
  Box seed{to_vector(config.seed_min), to_vector(config.seed_max)};
  const double rho0 = config.rho0.value_or(0.0);
  if (config.conjugated()) {
    const MapSpec& spec = config.maps.front();
    IFSystem base(config.d, instantiate_similarities(spec.base, config.d),
                  seed, config.omega_margin, config.s_low, config.s_up, rho0);
    ConjugationResult result = build_conjugated(
        base, spec.c2, config.s_low, config.s_up, spec.grid_resolution);
    return BuiltSystem{std::move(result.system), result.check};
  }
  IFSystem system(config.d, instantiate_similarities(config.maps, config.d),
                  seed, config.omega_margin, config.s_low, config.s_up, rho0);
  return BuiltSystem{std::move(system), std::nullopt};
}

std::string config_digest(const SystemConfig& config) {
  // Canonical rendering independent of input formatting.
  std::ostringstream oss;
  oss.precision(17);
  oss << "d=" << config.d << ";m=" << config.alphabet_size << ";";
  std::function<void(const MapSpec&)> render = [&](const MapSpec& spec) {
    oss << spec.kind << "(";
    if (spec.kind == "similarity") {
      oss << spec.scale << ",[";
      for (double v : spec.orthogonal) oss << v << ",";
      oss << "],[";
      for (double v : spec.translation) oss << v << ",";
      oss << "]";
    } else {
      oss << spec.c2 << "," << spec.grid_resolution << ",";
      for (const MapSpec& inner : spec.base) render(inner);
    }
    oss << ")";
  };
  for (const MapSpec& spec : config.maps) render(spec);
  oss << ";box=";
  for (double v : config.seed_min) oss << v << ",";
  for (double v : config.seed_max) oss << v << ",";
  oss << ";margin=" << config.omega_margin << ";s=" << config.s_low << ","
      << config.s_up;
  if (config.rho0) oss << ";rho0=" << *config.rho0;

  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : oss.str()) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  std::ostringstream hex;
  hex << std::hex << hash;
  return hex.str();
}

}  // namespace rigidlim
