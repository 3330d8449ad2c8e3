// Command-line front end: ingests a JSON system config, dispatches one of
// the analysis commands, and emits a JSON report (plus CSV/PLY point
// clouds). Reports keep timing in a separate provenance section so the
// result section is byte-stable across identical seeded runs.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rigidlim/config.hpp"
#include "rigidlim/measure.hpp"
#include "rigidlim/tangency.hpp"

namespace {

using nlohmann::json;
using namespace rigidlim;

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInconclusive = 3;

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("RIGIDLIM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

// Atomic emit: write to a sibling temp file, then rename over the target.
void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + tmp.string());
    out << content;
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

void emit_report(json& report,
                 const std::chrono::steady_clock::time_point& start,
                 const std::string& out_path) {
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  report["provenance"] = {{"artifact_version", kVersion},
                          {"wall_time_ms", elapsed.count()}};
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(out_path, text);
  }
}

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (int k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

Vec parse_point(const std::string& text, int d) {
  Vec x(d);
  std::stringstream ss(text);
  std::string item;
  int k = 0;
  while (std::getline(ss, item, ',')) {
    if (k >= d) throw ConfigError("--point: too many coordinates");
    x[k++] = std::stod(item);
  }
  if (k != d) throw ConfigError("--point: expected " + std::to_string(d) +
                                " coordinates");
  return x;
}

json bracket_to_json(const DimensionBracket& bracket) {
  return {{"t_minus", bracket.t_minus},
          {"t_plus", bracket.t_plus},
          {"t", bracket.midpoint()},
          {"width", bracket.width()},
          {"depth", bracket.depth},
          {"exact_similarity", bracket.exact_similarity}};
}

// Shortest round-trip decimal rendering for the CSV outputs.
std::string format_double(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  double parsed = std::strtod(buffer, nullptr);
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == parsed) return shorter;
  }
  return buffer;
}

struct CommonArgs {
  std::string config_path;
  int depth = 6;
  double tol = 1e-12;
  std::uint64_t seed = 1;
  int count = 256;
  int l = 1;
  double delta = 0.25;
  double rho = 0.9;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "system config JSON")
      ->required();
  cmd->add_option("--depth", args.depth, "cylinder depth");
  cmd->add_option("--tol", args.tol, "bisection tolerance");
  cmd->add_option("--seed", args.seed, "RNG seed");
  cmd->add_option("--count", args.count, "sample count");
  cmd->add_option("--l", args.l, "plane dimension");
  cmd->add_option("--delta", args.delta, "cone aperture parameter");
  cmd->add_option("--rho", args.rho, "interpolation parameter");
  cmd->add_option("--out", args.out, "output file (default stdout)");
  cmd->add_option("--threads", args.threads,
                  "worker threads (overrides RIGIDLIM_THREADS)");
}

json base_report(const std::string& command, const SystemConfig& config,
                 const CommonArgs& args) {
  json report;
  report["command"] = command;
  report["config_digest"] = config_digest(config);
  report["parameters"] = {{"depth", args.depth}, {"tol", args.tol},
                          {"seed", args.seed},   {"count", args.count},
                          {"l", args.l},         {"delta", args.delta},
                          {"rho", args.rho},
                          {"threads", resolve_threads(args.threads)}};
  return report;
}

int cmd_validate(const CommonArgs& args, json& report) {
  const SystemConfig config = load_system_config(args.config_path);
  report = base_report("validate", config, args);
  json results;
  bool all_ok = true;
  try {
    BuiltSystem built = build_system(config);
    const IFSystem& system = built.system;
    if (built.h_check) {
      results["h_oletus"] = {{"norm_product", built.h_check->norm_product},
                             {"bound", built.h_check->bound},
                             {"accepted", built.h_check->accepted}};
    }
    const F1Report f1 = validate_f1(system, 2000, args.seed);
    results["f1"] = {{"ok", f1.ok},
                     {"worst_upper", f1.worst_upper},
                     {"worst_lower", f1.worst_lower},
                     {"s_low", system.s_low()},
                     {"s_up", system.s_up()}};
    const F3Report f3 = validate_f3(system, std::min(args.depth, 4), 1e-9);
    results["f3"] = {{"ok", f3.ok}, {"max_defect", f3.max_defect}};
    const OscReport osc = validate_osc(system, 24);
    json pairs = json::array();
    for (auto [i, j] : osc.overlap_pairs) pairs.push_back({i, j});
    results["osc"] = {{"ok", osc.ok},
                      {"certified", osc.certified},
                      {"overlap_pairs", pairs}};
    const BoundaryDensityReport bd =
        validate_boundary_density(system, 8, 64, args.seed);
    results["boundary_density"] = {{"ok", bd.ok}, {"min_ratio", bd.min_ratio}};
    all_ok = f1.ok && f3.ok && osc.ok && bd.ok &&
             (!built.h_check || built.h_check->accepted);
  } catch (const ConstructionRejectedError& e) {
    results["h_oletus"] = {{"norm_product", e.norm_product},
                           {"bound", e.bound},
                           {"accepted", false},
                           {"detail", e.what()}};
    all_ok = false;
  }
  results["all_ok"] = all_ok;
  report["results"] = results;
  return all_ok ? kExitOk : kExitValidation;
}

int cmd_dimension(const CommonArgs& args, json& report) {
  const SystemConfig config = load_system_config(args.config_path);
  report = base_report("dimension", config, args);
  BuiltSystem built = build_system(config);
  const DimensionBracket bracket =
      estimate_dimension(built.system, args.depth, args.tol);
  report["results"] = {{"bracket", bracket_to_json(bracket)}};
  return kExitOk;
}

int cmd_sample(const CommonArgs& args, json& report) {
  const SystemConfig config = load_system_config(args.config_path);
  report = base_report("sample", config, args);
  BuiltSystem built = build_system(config);
  const IFSystem& system = built.system;
  const DimensionBracket bracket =
      estimate_dimension(system, args.depth, args.tol);
  const CylinderWeights weights =
      conformal_weights(system, bracket.midpoint(), args.depth);

  Rng rng(args.seed);
  std::vector<std::uint64_t> picks;
  picks.reserve(std::size_t(args.count));
  for (int k = 0; k < args.count; ++k) {
    picks.push_back(std::uint64_t(
        rng.uniform_int(0, static_cast<int>(weights.size()) - 1)));
  }

  const int d = system.dim();
  std::string cloud;
  const bool ply = args.out.size() > 4 &&
                   args.out.substr(args.out.size() - 4) == ".ply";
  if (ply) {
    if (d != 3) throw ConfigError("PLY output is only defined for d = 3");
    std::ostringstream oss;
    oss << "ply\nformat binary_little_endian 1.0\nelement vertex "
        << picks.size()
        << "\nproperty float x\nproperty float y\nproperty float z\n"
           "property float weight\nend_header\n";
    for (std::uint64_t idx : picks) {
      float row[4] = {static_cast<float>(weights.points[idx][0]),
                      static_cast<float>(weights.points[idx][1]),
                      static_cast<float>(weights.points[idx][2]),
                      static_cast<float>(weights.weights[idx])};
      oss.write(reinterpret_cast<const char*>(row), sizeof(row));
    }
    cloud = oss.str();
  } else {
    std::ostringstream oss;
    for (int k = 0; k < d; ++k) oss << "x" << (k + 1) << ",";
    oss << "weight\n";
    for (std::uint64_t idx : picks) {
      for (int k = 0; k < d; ++k)
        oss << format_double(weights.points[idx][k]) << ",";
      oss << format_double(weights.weights[idx]) << "\n";
    }
    cloud = oss.str();
  }
  report["results"] = {{"count", picks.size()},
                       {"depth", args.depth},
                       {"t", bracket.midpoint()},
                       {"format", ply ? "ply" : "csv"}};
  if (args.out.empty()) {
    std::cout << cloud;
  } else {
    write_file_atomic(args.out, cloud);
  }
  return kExitOk;
}

int cmd_measure(const CommonArgs& args, json& report) {
  const SystemConfig config = load_system_config(args.config_path);
  report = base_report("measure", config, args);
  BuiltSystem built = build_system(config);
  const IFSystem& system = built.system;
  const DimensionBracket bracket =
      estimate_dimension(system, args.depth, args.tol);
  const CylinderWeights weights =
      conformal_weights(system, bracket.midpoint(), args.depth);

  double max_residual = 0.0;
  for (int i = 0; i < system.map_count(); ++i) {
    Word word;
    word.append(i);
    max_residual =
        std::max(max_residual, verify_conformal_identity(system, weights, word));
  }
  const DistortionConstants constants = distortion_constants(
      system, std::min(args.depth, 3), 12, args.seed ^ 0x5ca1ab1eULL);
  const AhlforsReport ahlfors = ahlfors_lower_check(
      system, weights, constants, 32, 4, args.seed);

  report["results"] = {
      {"bracket", bracket_to_json(bracket)},
      {"identity_residual_depth1", max_residual},
      {"ahlfors",
       {{"c_formula", ahlfors.c_formula},
        {"min_observed_ratio", ahlfors.min_observed_ratio},
        {"samples", ahlfors.samples},
        {"r_min", ahlfors.r_min},
        {"r_max", ahlfors.r_max},
        {"ok", ahlfors.ok}}}};
  if (!args.out.empty()) {
    std::ostringstream oss;
    write_weights_csv(oss, weights);
    write_file_atomic(args.out, oss.str());
  }
  return kExitOk;
}

int cmd_distortion(const CommonArgs& args, json& report) {
  const SystemConfig config = load_system_config(args.config_path);
  report = base_report("distortion", config, args);
  BuiltSystem built = build_system(config);
  const DistortionConstants constants =
      distortion_constants(built.system, args.depth, 12, args.seed);
  const BallInclusionReport inclusions =
      check_ball_inclusions(built.system, constants, args.count, args.seed);
  report["results"] = {{"c_hat", constants.c_hat},
                       {"k0_hat", constants.k0_hat},
                       {"d_hat", constants.d_hat},
                       {"depth", constants.depth},
                       {"ball_inclusion_trials", inclusions.trials},
                       {"ball_inclusion_violations",
                        inclusions.violations.size()}};
  return kExitOk;
}

int cmd_tangent(const CommonArgs& args, const std::string& point_text,
                json& report) {
  const SystemConfig config = load_system_config(args.config_path);
  report = base_report("tangent", config, args);
  BuiltSystem built = build_system(config);
  const IFSystem& system = built.system;
  const DimensionBracket bracket =
      estimate_dimension(system, args.depth, args.tol);
  const double t = bracket.midpoint();
  const CylinderWeights weights = conformal_weights(system, t, args.depth);
  const Vec apex = parse_point(point_text, system.dim());

  // Plane: least-residual fit around the apex; fall back to the first
  // coordinate plane when the local cloud degenerates.
  const auto radii = default_radius_grid(weights, system.rho0(), 6);
  std::optional<Subspace> plane;
  {
    std::vector<Vec> pts;
    std::vector<double> wts;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const double dist = (weights.points[k] - apex).norm();
      if (dist > weights.radius_bounds[k] && dist < radii.front()) {
        pts.push_back(weights.points[k]);
        wts.push_back(weights.weights[k]);
      }
    }
    if (static_cast<int>(pts.size()) >= args.l) {
      try {
        plane = fit_plane(pts, wts, apex, args.l);
      } catch (const DegenerateCloudError&) {
      }
    }
  }
  if (!plane) plane = Subspace::coordinate_plane(system.dim(), args.l);

  const WeakTangentResult result =
      weak_tangent_ratios(weights, apex, *plane, args.delta, t, radii);
  json ratios = json::array();
  for (auto [r, ratio] : result.ratios)
    ratios.push_back({{"r", r}, {"ratio", ratio}});
  json basis = json::array();
  for (int c = 0; c < plane->basis().cols(); ++c)
    basis.push_back(vec_to_json(plane->basis().col(c)));
  report["results"] = {{"t", t},
                       {"delta", args.delta},
                       {"apex", vec_to_json(apex)},
                       {"plane_basis", basis},
                       {"ratios", ratios},
                       {"min_ratio", result.min_ratio}};
  return kExitOk;
}

int cmd_rigidity(const CommonArgs& args, json& report) {
  const SystemConfig config = load_system_config(args.config_path);
  report = base_report("rigidity", config, args);
  BuiltSystem built = build_system(config);
  RigidityConfig rc;
  rc.depth = args.depth;
  rc.seed = args.seed;
  rc.spread_delta = args.delta < 1.0 ? std::min(args.delta, 0.5) : 0.2;
  rc.spread_rho = args.rho;
  const RigidityVerdict verdict = rigidity_classify(built.system, args.l, rc);

  json results;
  switch (verdict.kind) {
    case RigidityKind::Tangential: results["verdict"] = "TANGENTIAL"; break;
    case RigidityKind::Spread: results["verdict"] = "SPREAD"; break;
    case RigidityKind::Inconclusive: results["verdict"] = "INCONCLUSIVE"; break;
  }
  results["l"] = verdict.l;
  results["bracket"] = bracket_to_json(verdict.bracket);
  results["min_tangent_score"] = verdict.min_tangent_score;
  results["tangency_threshold"] = verdict.tangency_threshold;
  results["diagnostics"] = verdict.diagnostics;
  if (verdict.certificate) {
    json assignments = json::array();
    for (const PlaneAssignment& pa : verdict.certificate->assignments) {
      json basis = json::array();
      for (int c = 0; c < pa.plane.basis().cols(); ++c)
        basis.push_back(vec_to_json(pa.plane.basis().col(c)));
      assignments.push_back(
          {{"apex", vec_to_json(pa.apex)}, {"plane_basis", basis}});
    }
    results["certificate"] = {{"delta", verdict.certificate->delta},
                              {"r", verdict.certificate->r},
                              {"assignments", assignments}};
  }
  if (verdict.c1) {
    results["c1"] = {{"pairwise_ok", verdict.c1->pairwise_ok},
                     {"containment_ok", verdict.c1->containment_ok},
                     {"max_pairwise_metric", verdict.c1->max_pairwise_metric}};
  }
  if (verdict.witness) {
    const SpreadWitness& w = *verdict.witness;
    results["witness"] = {{"word_n", w.word_n.to_string()},
                          {"lambda", w.lambda},
                          {"ball_center", vec_to_json(w.ball_center)},
                          {"ball_radius", w.ball_radius},
                          {"mass", w.mass},
                          {"required_mass", w.required_mass},
                          {"tube_distance", w.tube_distance}};
  }
  report["results"] = results;
  return verdict.kind == RigidityKind::Inconclusive ? kExitInconclusive
                                                    : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rigidity analysis of fractal limit sets"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string point_text;

  CLI::App* validate = app.add_subcommand("validate", "check F1/F3/OSC/"
                                          "boundary density");
  add_common(validate, args);
  CLI::App* dimension = app.add_subcommand("dimension", "dimension bracket");
  add_common(dimension, args);
  CLI::App* sample = app.add_subcommand("sample", "point-cloud export");
  add_common(sample, args);
  CLI::App* measure = app.add_subcommand("measure", "conformal weights and "
                                         "Ahlfors floor");
  add_common(measure, args);
  CLI::App* distortion = app.add_subcommand("distortion", "distortion "
                                            "constants and ball inclusions");
  add_common(distortion, args);
  CLI::App* tangent = app.add_subcommand("tangent", "weak-tangent quotients "
                                         "at a point");
  add_common(tangent, args);
  tangent->add_option("--point", point_text, "apex coordinates, comma-"
                      "separated")->required();
  CLI::App* rigidity = app.add_subcommand("rigidity", "tangential/spread "
                                          "classification");
  add_common(rigidity, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  json report;
  int status = kExitOk;
  try {
    if (validate->parsed()) status = cmd_validate(args, report);
    else if (dimension->parsed()) status = cmd_dimension(args, report);
    else if (sample->parsed()) status = cmd_sample(args, report);
    else if (measure->parsed()) status = cmd_measure(args, report);
    else if (distortion->parsed()) status = cmd_distortion(args, report);
    else if (tangent->parsed()) status = cmd_tangent(args, point_text, report);
    else if (rigidity->parsed()) status = cmd_rigidity(args, report);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    // The sample command writes its cloud to --out and its report to
    // stdout; with no --out the cloud owns stdout and the report is
    // dropped.
    if (sample->parsed()) {
      if (!args.out.empty()) emit_report(report, start, "");
    } else {
      emit_report(report, start, args.out);
    }
  } catch (const Error& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitValidation;
  }
  return status;
}
