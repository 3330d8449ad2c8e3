#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rigidlim/grassmann.hpp"
#include "rigidlim/measure.hpp"

namespace rigidlim {

/// Finite surrogate of the weak-tangent liminf quotient at one apex and
/// plane: complementary-tube mass over r^t along a radius grid.
struct WeakTangentResult {
  Vec apex;
  double delta = 0.0;
  double t = 0.0;
  std::vector<std::pair<double, double>> ratios;  // (r, ratio), r decreasing
  double min_ratio = 0.0;
};

WeakTangentResult weak_tangent_ratios(const CylinderWeights& weights,
                                      const Vec& apex, const Subspace& plane,
                                      double delta, double t,
                                      const std::vector<double>& radii);

/// Geometric radius grid r_max * 2^{-k} clipped above the cylinder
/// resolution of the weight table.
std::vector<double> default_radius_grid(const CylinderWeights& weights,
                                        double r_max, int levels);

struct ConeContainment {
  bool holds = true;
  std::vector<Vec> violators;
};

/// E cap B(a,r) subset X(a,V,delta), tested on cylinder representatives.
/// Representatives within their own radius bound of the apex are skipped
/// (the cone is open at its apex).
ConeContainment cone_containment_check(const CylinderWeights& weights,
                                       const Vec& apex, const Subspace& plane,
                                       double delta, double r);

struct PlaneAssignment {
  Vec apex;
  Subspace plane;
};

struct TangentialityCertificate {
  double delta = 0.0;
  double r = 0.0;
  std::vector<PlaneAssignment> assignments;
};

struct TangentialityFailure {
  Vec apex;
  std::optional<Subspace> best_plane;
  double r = 0.0;
  int violator_count = 0;
};

struct TangentialityOutcome {
  std::optional<TangentialityCertificate> certificate;
  std::optional<TangentialityFailure> failure;
  bool success() const { return certificate.has_value(); }
};

/// Searches a decreasing r-grid for a scale at which every sampled apex
/// carries a fitted plane satisfying the containment. Returns the largest
/// passing r, or the failing apex at the last scale tried.
TangentialityOutcome uniform_tangentiality(const IFSystem& system,
                                           const CylinderWeights& weights,
                                           int l, double delta,
                                           int radius_levels, int apex_sample,
                                           std::uint64_t seed);

/// Admissible-radius bundle for the small-angle lemma.
struct SmallAngleParams {
  double delta = 0.0;
  double rho = 0.0;  // in [1/2, 1)
  double r0 = 0.0;
};

/// r0(delta, rho) from the lemma's proof; for c = 0 every radius below
/// dist(E, boundary of Omega) is admissible.
SmallAngleParams small_angle_params(const IFSystem& system,
                                    const DistortionConstants& constants,
                                    double delta, double rho);

struct SmallAngleViolation {
  Vec point;
  Vec image;
};

struct SmallAngleReport {
  int trials = 0;
  std::vector<SmallAngleViolation> violations;
};

/// Samples the truncated cone X(a,r,V,rho*delta), maps it by phi_word, and
/// checks membership in the image cone of the lemma.
SmallAngleReport small_angle_image_check(const IFSystem& system, const Word& word,
                                         const Vec& apex, const Subspace& plane,
                                         const SmallAngleParams& params,
                                         double r, int trials,
                                         std::uint64_t seed);

struct SpreadWitness {
  Word word_n;        // i|_n along the code of the apex
  double lambda = 0.0;
  Vec ball_center;
  double ball_radius = 0.0;
  double mass = 0.0;
  double required_mass = 0.0;
  double tube_distance = 0.0;  // |Q_V(center - a)|
  bool mass_ok = false;
  bool tube_avoided = false;
  bool inside_outer_ball = false;

  bool ok() const { return mass_ok && tube_avoided && inside_outer_ball; }
};

/// Maps the no-tangent configuration (x, y) down the code of the apex and
/// produces the ball that must carry mass outside every tube around V.
SpreadWitness spread_witness(const IFSystem& system,
                             const CylinderWeights& weights,
                             const DistortionConstants& constants,
                             const Vec& apex, const Subspace& plane, double r,
                             double delta, double rho, const Vec& x,
                             const Vec& y, const Word& code_of_apex);

struct C1CompatibilityReport {
  bool pairwise_ok = true;
  bool containment_ok = true;
  double max_pairwise_metric = 0.0;
};

/// Prop.-style compatibility of a plane field: nearby planes closer than
/// 8^{-1/2} and mutual cone containment at aperture 1/2.
C1CompatibilityReport c1_compatibility_check(
    const std::vector<PlaneAssignment>& points, double r0);

enum class RigidityKind { Tangential, Spread, Inconclusive };

struct RigidityConfig {
  int depth = 6;
  int apex_sample = 12;
  int plane_sample = 180;
  std::vector<double> delta_grid{0.04, 0.1, 0.25, 0.5};
  double spread_delta = 0.2;
  double spread_rho = 0.9;
  int radius_levels = 6;
  double dimension_tol = 1e-12;
  double tangency_threshold_scale = 1e-3;
  std::uint64_t seed = 1;
};

struct RigidityVerdict {
  RigidityKind kind = RigidityKind::Inconclusive;
  int l = 0;
  DimensionBracket bracket;
  double min_tangent_score = 0.0;  // best (smallest) apex score seen
  double tangency_threshold = 0.0;
  std::optional<TangentialityCertificate> certificate;
  std::optional<C1CompatibilityReport> c1;
  std::optional<SpreadWitness> witness;
  std::string diagnostics;
};

/// The empirical side of the tangential / spread dichotomy.
RigidityVerdict rigidity_classify(const IFSystem& system, int l,
                                  const RigidityConfig& config);

/// Exact-to-machine-precision point of E: follows the word repeated
/// periodically until the contraction bound hits floating-point noise.
Vec exact_limit_point(const IFSystem& system, const Word& word);

}  // namespace rigidlim
