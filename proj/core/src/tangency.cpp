#include "rigidlim/tangency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rigidlim {

namespace {

double max_radius_bound(const CylinderWeights& weights) {
  double m = 0.0;
  for (double rb : weights.radius_bounds) m = std::max(m, rb);
  return m;
}

// Mass in B(a,r) outside the closed tube of width delta^{1/2} * r around
// V through a. Representatives inside their own radius bound of the apex
// are skipped: the cone excludes its apex, and such a cylinder cannot be
// resolved against it.
double off_tube_mass(const CylinderWeights& weights, const Vec& apex,
                     const Subspace& plane, double delta, double r) {
  const double tube = std::sqrt(delta) * r;
  double mass = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const Vec diff = weights.points[k] - apex;
    const double dist = diff.norm();
    if (dist <= weights.radius_bounds[k]) continue;
    if (dist >= r) continue;
    if (plane.complement_norm(diff) > tube) mass += weights.weights[k];
  }
  return mass;
}

}  // namespace

std::vector<double> default_radius_grid(const CylinderWeights& weights,
                                        double r_max, int levels) {
  // Radii must stay far enough above the cylinder resolution that the
  // tube test actually sees cylinders, not quantization noise.
  const double floor = 30.0 * max_radius_bound(weights);
  std::vector<double> radii;
  double r = r_max;
  for (int k = 0; k < levels && r >= floor; ++k, r *= 0.5) radii.push_back(r);
  if (radii.empty())
    throw ResolutionError(
        "radius grid empty: weight table too shallow for r_max " +
        std::to_string(r_max) + " (increase the depth)");
  return radii;
}

WeakTangentResult weak_tangent_ratios(const CylinderWeights& weights,
                                      const Vec& apex, const Subspace& plane,
                                      double delta, double t,
                                      const std::vector<double>& radii) {
  if (delta <= 0.0 || delta >= 1.0)
    throw PreconditionError("delta must lie in (0,1)");
  WeakTangentResult out;
  out.apex = apex;
  out.delta = delta;
  out.t = t;
  out.min_ratio = std::numeric_limits<double>::infinity();
  for (double r : radii) {
    const double ratio =
        off_tube_mass(weights, apex, plane, delta, r) / std::pow(r, t);
    out.ratios.emplace_back(r, ratio);
    out.min_ratio = std::min(out.min_ratio, ratio);
  }
  return out;
}

ConeContainment cone_containment_check(const CylinderWeights& weights,
                                       const Vec& apex, const Subspace& plane,
                                       double delta, double r) {
  ConeContainment out;
  const double root = std::sqrt(delta);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const Vec diff = weights.points[k] - apex;
    const double dist = diff.norm();
    if (dist <= weights.radius_bounds[k]) continue;  // unresolved vs apex
    if (dist >= r) continue;
    // A representative only certifies a violation when the whole cylinder
    // sits outside the open cone.
    if (plane.complement_norm(diff) - weights.radius_bounds[k] >=
        root * dist) {
      out.holds = false;
      out.violators.push_back(weights.points[k]);
    }
  }
  return out;
}

TangentialityOutcome uniform_tangentiality(const IFSystem& system,
                                           const CylinderWeights& weights,
                                           int l, double delta,
                                           int radius_levels, int apex_sample,
                                           std::uint64_t seed) {
  if (l < 1 || l >= system.dim())
    throw DimensionError("plane dimension must lie in [1, d-1]");
  Rng rng(seed);
  std::vector<std::size_t> apexes;
  for (int k = 0; k < apex_sample; ++k) {
    apexes.push_back(std::size_t(
        rng.uniform_int(0, static_cast<int>(weights.size()) - 1)));
  }
  std::sort(apexes.begin(), apexes.end());
  apexes.erase(std::unique(apexes.begin(), apexes.end()), apexes.end());

  const auto radii = default_radius_grid(weights, system.rho0(), radius_levels);

  TangentialityOutcome out;
  TangentialityFailure last_failure;
  for (double r : radii) {
    bool all_ok = true;
    std::vector<PlaneAssignment> assignments;
    for (std::size_t idx : apexes) {
      const Vec& a = weights.points[idx];
      // Localize the fit to B(a,r); fall back to the whole cloud when the
      // ball resolves too few cylinders.
      std::vector<Vec> pts;
      std::vector<double> wts;
      for (std::size_t k = 0; k < weights.size(); ++k) {
        if (k == idx) continue;
        if ((weights.points[k] - a).norm() < r) {
          pts.push_back(weights.points[k]);
          wts.push_back(weights.weights[k]);
        }
      }
      std::optional<Subspace> plane;
      if (static_cast<int>(pts.size()) >= l) {
        try {
          plane = fit_plane(pts, wts, a, l);
        } catch (const DegenerateCloudError&) {
        }
      }
      if (!plane) {
        all_ok = false;
        last_failure = TangentialityFailure{a, std::nullopt, r, 0};
        break;
      }
      const auto check = cone_containment_check(weights, a, *plane, delta, r);
      if (!check.holds) {
        all_ok = false;
        last_failure = TangentialityFailure{
            a, plane, r, static_cast<int>(check.violators.size())};
        break;
      }
      assignments.push_back(PlaneAssignment{a, *plane});
    }
    if (all_ok) {
      out.certificate =
          TangentialityCertificate{delta, r, std::move(assignments)};
      return out;
    }
  }
  out.failure = last_failure;
  return out;
}

SmallAngleParams small_angle_params(const IFSystem& system,
                                    const DistortionConstants& constants,
                                    double delta, double rho) {
  if (delta <= 0.0 || delta >= 1.0)
    throw PreconditionError("delta must lie in (0,1)");
  if (rho < 0.5 || rho >= 1.0)
    throw PreconditionError("rho must lie in [1/2, 1)");
  SmallAngleParams params;
  params.delta = delta;
  params.rho = rho;
  double r0 = system.dist_limit_to_omega_boundary();
  const double c = constants.c_hat;
  if (c > 0.0) {
    // Two demands on the scale: the distortion proxy K(s) = (1 - c s)^{-1}
    // must stay below kappa = (2/(rho+1))^{1/2}, and the derivative
    // variation must fit the angle budget.
    const double kappa = std::sqrt(2.0 / (rho + 1.0));
    const double angle_budget = std::sqrt(delta) / c *
                                (std::sqrt((rho + 1.0) / 2.0) - std::sqrt(rho));
    const double kappa_budget = (1.0 - 1.0 / kappa) / c;
    r0 = std::min({r0, angle_budget, kappa_budget});
  }
  params.r0 = r0;
  return params;
}

SmallAngleReport small_angle_image_check(const IFSystem& system,
                                         const Word& word, const Vec& apex,
                                         const Subspace& plane,
                                         const SmallAngleParams& params,
                                         double r, int trials,
                                         std::uint64_t seed) {
  if (r >= params.r0)
    throw PreconditionError("radius " + std::to_string(r) +
                            " is not below the admissible r0 " +
                            std::to_string(params.r0));
  if (!word.valid_over(system.alphabet()))
    throw InvalidWordError("word uses symbols outside the alphabet");
  Rng rng(seed);
  const int d = system.dim();
  const double inner_root = std::sqrt(params.rho * params.delta);
  const double outer_root = std::sqrt(params.delta);

  const auto at_apex = compose(system, word, apex);
  const Subspace image_plane = map_subspace(at_apex.jacobian, plane);
  double word_sup = 1.0;
  for (int k = 0; k < word.length(); ++k) word_sup *= system.sup_norm(word[k]);

  SmallAngleReport report;
  report.trials = trials;
  for (int k = 0; k < trials; ++k) {
    // Rejection-sample the truncated cone X(a,r,V,rho*delta).
    Vec x;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 100000)
        throw ResolutionError("cone sampling failed to converge");
      Vec dir = rng.unit_vector(d);
      if (plane.complement_norm(dir) >= inner_root) continue;
      x = apex + dir * r * std::pow(rng.uniform(0.0, 1.0), 1.0 / d);
      break;
    }
    const Vec y = compose(system, word, x).value;
    const Vec diff = y - at_apex.value;
    const double dist = diff.norm();
    const bool in_cone =
        dist > 0.0 &&
        image_plane.complement_norm(diff) < outer_root * dist * (1.0 + 1e-9);
    const bool in_ball = dist < word_sup * r * (1.0 + 1e-9);
    if (!(in_cone && in_ball))
      report.violations.push_back(SmallAngleViolation{x, y});
  }
  return report;
}

Vec exact_limit_point(const IFSystem& system, const Word& word) {
  if (word.is_empty())
    throw InvalidWordError("empty word has no limit point");
  Word extended = word;
  // Repeat until the cylinder bound drops below floating-point noise.
  double bound = cylinder_radius_bound(system, extended);
  int guard = 0;
  while (bound > 1e-16 && guard++ < 64) {
    for (int k = 0; k < word.length(); ++k) extended.append(word[k]);
    bound = cylinder_radius_bound(system, extended);
  }
  return project(system, extended).point;
}

SpreadWitness spread_witness(const IFSystem& system,
                             const CylinderWeights& weights,
                             const DistortionConstants& constants,
                             const Vec& apex, const Subspace& plane, double r,
                             double delta, double rho, const Vec& x,
                             const Vec& y, const Word& code_of_apex) {
  if (delta <= 0.0 || delta >= 1.0)
    throw PreconditionError("delta must lie in (0,1)");
  if (rho <= 1.0 / (delta + 1.0) || rho >= 1.0)
    throw PreconditionError("rho must lie in (1/(delta+1), 1)");
  if (code_of_apex.is_empty())
    throw PreconditionError("the apex needs a nonempty code");
  const double r_prime = 2.0 * (x - y).norm();
  if (r_prime <= 0.0)
    throw InvalidWitnessError("x and y coincide");

  const double big_d = constants.d_hat;
  const double k0 = constants.k0_hat;

  // n = smallest prefix length with |phi_{i|n}'| < D^{-1} r / 2, extending
  // the code periodically as needed.
  const double target = r / (2.0 * big_d);
  Word prefix;
  double prefix_sup = 1.0;
  {
    int k = 0;
    while (prefix_sup >= target) {
      prefix.append(code_of_apex[k % code_of_apex.length()]);
      prefix_sup *= system.sup_norm(prefix[prefix.length() - 1]);
      ++k;
      if (k > 10000)
        throw ResolutionError("code prefix failed to contract below target");
    }
  }

  // Pull the plane back along the realized prefix so the image cone is
  // axis-exact, then test the no-tangent hypothesis on (x, y).
  const auto at_x = compose(system, prefix, x);
  Eigen::JacobiSVD<Mat> svd(at_x.jacobian);
  if (svd.singularValues().minCoeff() <= 1e-14)
    throw SingularMapError("degenerate Jacobian along the code");
  const Subspace pulled =
      map_subspace(at_x.jacobian.inverse(), plane);
  if (cone_contains(Cone(x, pulled, delta), y))
    throw InvalidWitnessError(
        "y lies in the pulled-back cone: no spread at this pair");

  double min_inf_at_y = std::numeric_limits<double>::infinity();
  for (int i = 0; i < system.map_count(); ++i) {
    min_inf_at_y =
        std::min(min_inf_at_y, min_singular(system.map(i).jacobian(y)));
  }

  const double eta =
      std::min(0.5, (1.0 - std::sqrt(rho)) * std::sqrt(delta) / 2.0);
  const double lambda = 0.5 * std::sqrt(delta - (1.0 / rho - 1.0)) /
                        (k0 * k0) * eta * r_prime * min_inf_at_y /
                        big_d * 0.5;

  SpreadWitness witness;
  witness.word_n = prefix;
  witness.lambda = lambda;
  witness.ball_radius = lambda * r / 8.0;

  const Vec fx = at_x.value;
  const Vec fy = compose(system, prefix, y).value;
  const double spread_x = plane.complement_norm(fx - apex);
  const double spread_y = plane.complement_norm(fy - apex);
  witness.ball_center = spread_x >= spread_y ? fx : fy;
  witness.tube_distance =
      plane.complement_norm(witness.ball_center - apex);

  // The ball must clear the tube V_a(lambda r / 8) entirely and stay in
  // the outer ball B(a,r).
  witness.tube_avoided =
      witness.tube_distance >= 2.0 * witness.ball_radius;
  witness.inside_outer_ball =
      (witness.ball_center - apex).norm() + witness.ball_radius <= r;

  const double c_ahlfors =
      std::pow(constants.d_hat, -weights.t) *
      std::pow(constants.k0_hat, -2.0 * weights.t) *
      std::pow(system.min_inf_norm(), weights.t);
  witness.required_mass =
      c_ahlfors * std::pow(lambda / 8.0, weights.t) * std::pow(r, weights.t);

  // Resolve cylinders well below the ball before trusting the mass.
  int max_depth = weights.depth;
  {
    const double diam = system.seed().diameter();
    double scale = system.min_sup_norm();
    for (int i = 0; i < system.map_count(); ++i)
      scale = std::max(scale, system.sup_norm(i));
    double bound = diam;
    while (bound > witness.ball_radius / 20.0 && max_depth < 64) {
      bound *= scale;
      ++max_depth;
    }
  }
  witness.mass = descend_ball_mass(system, weights.t, witness.ball_center,
                                   witness.ball_radius, max_depth);
  witness.mass_ok = witness.mass >= witness.required_mass;
  return witness;
}

C1CompatibilityReport c1_compatibility_check(
    const std::vector<PlaneAssignment>& points, double r0) {
  C1CompatibilityReport report;
  const double metric_cap = 1.0 / std::sqrt(8.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (i == j) continue;
      if ((points[i].apex - points[j].apex).norm() >= r0) continue;
      const double dist = metric(points[i].plane, points[j].plane);
      report.max_pairwise_metric = std::max(report.max_pairwise_metric, dist);
      if (dist >= metric_cap) report.pairwise_ok = false;
      // Every nearby sample must sit in the aperture-1/2 cone at every
      // other nearby sample, measured with the plane of the center apex.
      for (std::size_t k = 0; k < points.size(); ++k) {
        if (k == j) continue;
        if ((points[i].apex - points[k].apex).norm() >= r0) continue;
        if ((points[k].apex - points[j].apex).norm() <= 1e-9) continue;
        if (!cone_contains(Cone(points[j].apex, points[i].plane, 0.5),
                           points[k].apex)) {
          report.containment_ok = false;
        }
      }
    }
  }
  return report;
}

namespace {

struct ApexScore {
  std::size_t index = 0;
  double score = std::numeric_limits<double>::infinity();
  std::optional<Subspace> best_plane;
};

}  // namespace

RigidityVerdict rigidity_classify(const IFSystem& system, int l,
                                  const RigidityConfig& config) {
  const int d = system.dim();
  if (l < 1 || l >= d) throw DimensionError("plane dimension out of range");

  RigidityVerdict verdict;
  verdict.l = l;
  verdict.bracket =
      estimate_dimension(system, config.depth, config.dimension_tol);
  const double t = verdict.bracket.midpoint();
  const CylinderWeights weights = conformal_weights(system, t, config.depth);
  const DistortionConstants constants = distortion_constants(
      system, std::min(config.depth, 3), 12, config.seed ^ 0x5ca1ab1eULL);

  const auto radii =
      default_radius_grid(weights, system.rho0(), config.radius_levels);

  Rng rng(config.seed);
  std::vector<std::size_t> apexes;
  for (int k = 0; k < config.apex_sample; ++k) {
    apexes.push_back(std::size_t(
        rng.uniform_int(0, static_cast<int>(weights.size()) - 1)));
  }
  std::sort(apexes.begin(), apexes.end());
  apexes.erase(std::unique(apexes.begin(), apexes.end()), apexes.end());

  // Reference scale: the quotient at the largest radius for a random
  // plane. Positive unless the whole set already sits in one tube, in
  // which case fall back to r^{-t} mass of the full ball.
  double baseline;
  {
    const Vec& a0 = weights.points[apexes.front()];
    Subspace ref = Subspace::random(d, l, rng);
    baseline = weak_tangent_ratios(weights, a0, ref, config.delta_grid.front(),
                                   t, {radii.front()})
                   .min_ratio;
    if (baseline <= 0.0) baseline = std::pow(radii.front(), -t);
  }
  verdict.tangency_threshold = config.tangency_threshold_scale * baseline;

  // Candidate planes per apex: a fitted plane plus random probes; the
  // score of a plane is its worst min-ratio over the delta grid, and an
  // apex scores by its best plane.
  std::vector<ApexScore> scores;
  double global_best = std::numeric_limits<double>::infinity();
  for (std::size_t idx : apexes) {
    const Vec& a = weights.points[idx];
    std::vector<Subspace> candidates;
    {
      std::vector<Vec> pts;
      std::vector<double> wts;
      const double r_fit = radii.back();
      for (std::size_t k = 0; k < weights.size(); ++k) {
        if (k == idx) continue;
        if ((weights.points[k] - a).norm() < r_fit) {
          pts.push_back(weights.points[k]);
          wts.push_back(weights.weights[k]);
        }
      }
      if (static_cast<int>(pts.size()) >= l) {
        try {
          candidates.push_back(fit_plane(pts, wts, a, l));
        } catch (const DegenerateCloudError&) {
        }
      }
    }
    for (int k = 0; k < config.plane_sample; ++k)
      candidates.push_back(Subspace::random(d, l, rng));

    ApexScore best;
    best.index = idx;
    for (const Subspace& plane : candidates) {
      double worst = 0.0;
      for (double delta : config.delta_grid) {
        worst = std::max(
            worst,
            weak_tangent_ratios(weights, a, plane, delta, t, radii).min_ratio);
        if (worst > best.score) break;
      }
      if (worst < best.score) {
        best.score = worst;
        best.best_plane = plane;
      }
    }
    global_best = std::min(global_best, best.score);
    scores.push_back(std::move(best));
  }
  verdict.min_tangent_score = global_best;

  if (global_best < verdict.tangency_threshold) {
    // Tangent-like: try to certify uniform tangentiality plus the
    // compatibility of the fitted plane field.
    bool all_ok = true;
    std::optional<TangentialityCertificate> cert;
    for (double delta : config.delta_grid) {
      auto outcome =
          uniform_tangentiality(system, weights, l, delta,
                                config.radius_levels, config.apex_sample,
                                config.seed + 17);
      if (!outcome.success()) {
        all_ok = false;
        break;
      }
      if (!cert || delta < cert->delta) cert = outcome.certificate;
    }
    if (all_ok && cert) {
      verdict.c1 = c1_compatibility_check(cert->assignments, cert->r);
      verdict.certificate = cert;
      if (verdict.c1->pairwise_ok && verdict.c1->containment_ok) {
        verdict.kind = RigidityKind::Tangential;
        verdict.diagnostics = "tube quotients vanish and the plane field is "
                              "pairwise compatible";
        return verdict;
      }
      verdict.diagnostics = "tube quotients vanish but the plane field "
                            "fails compatibility";
      return verdict;
    }
    verdict.diagnostics = "tube quotients vanish at sampled apexes but no "
                          "uniform scale certified";
    return verdict;
  }

  // Spread side: build a mapped witness ball for the best-scoring plane.
  const double delta_w = config.spread_delta;
  const double rho_w = config.spread_rho;
  const double r_w = system.rho0();
  const double pair_cap = small_angle_params(system, constants,
                                             std::min(0.999, 1.0 / rho_w -
                                                                delta_w),
                                             rho_w)
                              .r0 /
                          2.0;
  int attempts = 0;
  constexpr int kMaxWitnessAttempts = 200;
  for (const ApexScore& cand : scores) {
    if (!cand.best_plane) continue;
    const Word code = weights.word_at(cand.index);
    const Vec a_exact = exact_limit_point(system, code);
    const Subspace& plane = *cand.best_plane;

    // x ranges over exact points of nearby deep cylinders; y is searched
    // among representatives close to x but outside the pulled-back cone.
    for (const ApexScore& xc : scores) {
      const Word x_code = weights.word_at(xc.index);
      const Vec x = exact_limit_point(system, x_code);
      for (std::size_t k = 0; k < weights.size(); ++k) {
        const double dist = (weights.points[k] - x).norm();
        if (dist <= weights.radius_bounds[k] * 4.0 || dist >= pair_cap)
          continue;
        if (++attempts > kMaxWitnessAttempts) {
          verdict.diagnostics = "witness attempt budget exhausted";
          return verdict;
        }
        const Vec y = exact_limit_point(system, weights.word_at(k));
        try {
          SpreadWitness witness =
              spread_witness(system, weights, constants, a_exact, plane, r_w,
                             delta_w, rho_w, x, y, code);
          if (witness.ok()) {
            verdict.witness = std::move(witness);
            verdict.kind = RigidityKind::Spread;
            verdict.diagnostics =
                "mapped witness ball carries mass clear of the tube";
            return verdict;
          }
        } catch (const InvalidWitnessError&) {
        } catch (const ResolutionError&) {
        }
      }
    }
  }
  std::ostringstream oss;
  oss << "no tangent plane below threshold " << verdict.tangency_threshold
      << " and no verified spread witness";
  verdict.diagnostics = oss.str();
  return verdict;
}

}  // namespace rigidlim
