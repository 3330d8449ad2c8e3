#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "rigidlim/tangency.hpp"

using namespace rigidlim;
using namespace rigidlim::testing;

namespace {

Subspace x_axis2() { return Subspace::coordinate_plane(2, 1); }

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

}  // namespace

TEST_CASE("line embedding has vanishing tube quotients on the true tangent") {
  IFSystem line = make_line_cantor();
  DimensionBracket bracket = estimate_dimension(line, 7, 1e-13);
  CylinderWeights weights = conformal_weights(line, bracket.midpoint(), 7);
  auto radii = default_radius_grid(weights, line.rho0(), 6);
  for (double delta : {0.04, 0.1, 0.25, 0.5}) {
    WeakTangentResult result = weak_tangent_ratios(
        weights, v2(0, 0), x_axis2(), delta, bracket.midpoint(), radii);
    CHECK(result.min_ratio == 0.0);
    for (auto [r, ratio] : result.ratios) CHECK(ratio == 0.0);
  }
  // with a tilted plane the quotient is bounded away from zero; at
  // delta = 0.04 the off-tube annulus spans more than one scale factor,
  // so it meets Cantor mass at every grid radius
  Mat tilt(2, 1);
  tilt << 1.0, 1.0;
  WeakTangentResult off = weak_tangent_ratios(
      weights, v2(0, 0), Subspace(2, tilt), 0.04, bracket.midpoint(), radii);
  CHECK(off.min_ratio > 0.01);
}

TEST_CASE("a wrong exponent only rescales the quotients") {
  IFSystem line = make_line_cantor();
  DimensionBracket bracket = estimate_dimension(line, 6, 1e-13);
  const double t = bracket.midpoint();
  CylinderWeights weights = conformal_weights(line, t, 6);
  auto radii = default_radius_grid(weights, line.rho0(), 4);
  Mat tilt(2, 1);
  tilt << 1.0, 0.5;
  WeakTangentResult at_t =
      weak_tangent_ratios(weights, v2(0, 0), Subspace(2, tilt), 0.25, t, radii);
  WeakTangentResult at_smaller = weak_tangent_ratios(
      weights, v2(0, 0), Subspace(2, tilt), 0.25, t - 0.2, radii);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double expected =
        at_t.ratios[k].second * std::pow(radii[k], 0.2);
    CHECK(at_smaller.ratios[k].second ==
          doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("koch quotients stay positive for every direction") {
  IFSystem koch = make_koch();
  const double t = estimate_dimension(koch, 6, 1e-13).midpoint();
  CylinderWeights weights = conformal_weights(koch, t, 6);
  auto radii = default_radius_grid(weights, koch.rho0(), 5);
  const Vec apex = exact_limit_point(koch, Word({1, 3}));  // spike vertex
  double floor = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 60; ++k) {
    const double angle = M_PI * k / 60.0;
    Mat dir(2, 1);
    dir << std::cos(angle), std::sin(angle);
    WeakTangentResult result = weak_tangent_ratios(
        weights, apex, Subspace(2, dir), 0.25, t, radii);
    floor = std::min(floor, result.min_ratio);
  }
  CHECK(floor > 0.0);
}

TEST_CASE("cone containment over the cylinder cloud") {
  IFSystem line = make_line_cantor();
  const double t = estimate_dimension(line, 6, 1e-13).midpoint();
  CylinderWeights weights = conformal_weights(line, t, 6);
  ConeContainment ok = cone_containment_check(weights, v2(0, 0), x_axis2(),
                                              0.1, line.rho0());
  CHECK(ok.holds);
  // vertical line through the apex: everything else is a violator
  Mat vertical(2, 1);
  vertical << 0.0, 1.0;
  ConeContainment bad = cone_containment_check(
      weights, v2(0, 0), Subspace(2, vertical), 0.1, line.rho0());
  CHECK_FALSE(bad.holds);
  CHECK(bad.violators.size() > 10);
}

TEST_CASE("uniform tangentiality certificate on the line embedding") {
  IFSystem line = make_line_cantor();
  const double t = estimate_dimension(line, 7, 1e-13).midpoint();
  CylinderWeights weights = conformal_weights(line, t, 7);
  TangentialityOutcome outcome =
      uniform_tangentiality(line, weights, 1, 0.1, 5, 10, 3);
  REQUIRE(outcome.success());
  CHECK(outcome.certificate->r > 0.0);
  for (const PlaneAssignment& pa : outcome.certificate->assignments) {
    CHECK(metric(pa.plane, x_axis2()) < 1e-9);
  }

  IFSystem koch = make_koch();
  const double tk = estimate_dimension(koch, 6, 1e-13).midpoint();
  CylinderWeights wk = conformal_weights(koch, tk, 6);
  TangentialityOutcome fail = uniform_tangentiality(koch, wk, 1, 0.1, 5, 10, 3);
  CHECK_FALSE(fail.success());
  CHECK(fail.failure.has_value());
}

TEST_CASE("small-angle images stay in the image cone") {
  IFSystem dust = make_dust();
  DistortionConstants constants = distortion_constants(dust, 3, 8, 5);
  SmallAngleParams params = small_angle_params(dust, constants, 0.3, 0.75);
  // similarity branch: c = 0, so r0 is the boundary-distance fallback
  CHECK(constants.c_hat == 0.0);
  CHECK(params.r0 == doctest::Approx(dust.dist_limit_to_omega_boundary()));

  Rng rng(17);
  const Vec apex = exact_limit_point(dust, Word({0, 7, 3}));
  const Subspace plane = Subspace::random(3, 2, rng);
  SmallAngleReport report = small_angle_image_check(
      dust, Word({2, 5}), apex, plane, params, params.r0 * 0.9, 500, 19);
  CHECK(report.trials == 500);
  CHECK(report.violations.empty());

  CHECK_THROWS_AS(small_angle_image_check(dust, Word({2, 5}), apex, plane,
                                          params, params.r0 * 10.0, 10, 19),
                  PreconditionError);
}

TEST_CASE("spread witness on the koch curve") {
  IFSystem koch = make_koch();
  const double t = estimate_dimension(koch, 6, 1e-13).midpoint();
  CylinderWeights weights = conformal_weights(koch, t, 6);
  DistortionConstants constants = distortion_constants(koch, 3, 8, 5);

  const Word code({1, 3});
  const Vec apex = exact_limit_point(koch, code);
  const Vec x = exact_limit_point(koch, Word({0, 0}));
  const Subspace plane = x_axis2();
  const double r = koch.rho0();

  // search nearby points for a pair escaping the pulled-back cone
  std::optional<SpreadWitness> witness;
  Word y_code;
  for (const Word& w : cylinders_at_depth(koch.alphabet(), 4)) {
    const Vec y = exact_limit_point(koch, w);
    const double dist = (y - x).norm();
    if (dist < 1e-3 || dist > 0.07) continue;
    try {
      SpreadWitness candidate = spread_witness(koch, weights, constants, apex,
                                               plane, r, 0.2, 0.9, x, y, code);
      if (candidate.ok()) {
        witness = candidate;
        y_code = w;
        break;
      }
    } catch (const InvalidWitnessError&) {
    }
  }
  REQUIRE(witness.has_value());
  CHECK(witness->lambda > 0.0);
  CHECK(witness->mass >= witness->required_mass);
  CHECK(witness->tube_distance >= 2.0 * witness->ball_radius);

  // doubling r: lambda has no r-dependence, the code prefix only deepens
  const Vec y = exact_limit_point(koch, y_code);
  SpreadWitness doubled = spread_witness(koch, weights, constants, apex, plane,
                                         2.0 * r, 0.2, 0.9, x, y, code);
  CHECK(doubled.lambda == doctest::Approx(witness->lambda).epsilon(1e-12));
  CHECK(doubled.word_n.length() <= witness->word_n.length());
}

TEST_CASE("no spread witness exists inside a line") {
  IFSystem line = make_line_cantor();
  const double t = estimate_dimension(line, 6, 1e-13).midpoint();
  CylinderWeights weights = conformal_weights(line, t, 6);
  DistortionConstants constants = distortion_constants(line, 3, 8, 5);
  const Word code({0, 1});
  const Vec apex = exact_limit_point(line, code);
  const Vec x = exact_limit_point(line, Word({1, 0}));
  // every candidate y lies on the x-axis, inside the pulled-back cone
  for (const Word& w : cylinders_at_depth(line.alphabet(), 3)) {
    const Vec y = exact_limit_point(line, w);
    if ((y - x).norm() < 1e-9) continue;
    CHECK_THROWS_AS(spread_witness(line, weights, constants, apex, x_axis2(),
                                   line.rho0(), 0.2, 0.9, x, y, code),
                    InvalidWitnessError);
  }
}

TEST_CASE("parameter guards on the witness") {
  IFSystem koch = make_koch();
  const double t = estimate_dimension(koch, 4, 1e-13).midpoint();
  CylinderWeights weights = conformal_weights(koch, t, 4);
  DistortionConstants constants = distortion_constants(koch, 3, 8, 5);
  const Word code({1, 3});
  const Vec apex = exact_limit_point(koch, code);
  const Vec x = exact_limit_point(koch, Word({0, 0}));
  const Vec y = exact_limit_point(koch, Word({0, 1, 2}));
  // rho at or below 1/(delta+1) leaves lambda undefined
  CHECK_THROWS_AS(spread_witness(koch, weights, constants, apex, x_axis2(),
                                 koch.rho0(), 0.2, 0.8, x, y, code),
                  PreconditionError);
}

TEST_CASE("plane-field compatibility") {
  std::vector<PlaneAssignment> aligned;
  for (int k = 0; k < 5; ++k)
    aligned.push_back(PlaneAssignment{v2(0.1 * k, 0.0), x_axis2()});
  C1CompatibilityReport ok = c1_compatibility_check(aligned, 1.0);
  CHECK(ok.pairwise_ok);
  CHECK(ok.containment_ok);
  CHECK(ok.max_pairwise_metric == 0.0);

  // one plane tilted by 45 degrees breaks the 8^{-1/2} pairwise cap
  Mat tilt(2, 1);
  tilt << 1.0, 1.0;
  std::vector<PlaneAssignment> mixed = aligned;
  mixed.push_back(PlaneAssignment{v2(0.05, 0.0), Subspace(2, tilt)});
  C1CompatibilityReport bad = c1_compatibility_check(mixed, 1.0);
  CHECK_FALSE(bad.pairwise_ok);
}

TEST_CASE("classifier end-to-end on the reference systems") {
  RigidityConfig config;
  config.depth = 6;
  config.seed = 3;

  RigidityVerdict tangential = rigidity_classify(make_line_cantor(), 1, config);
  CHECK(tangential.kind == RigidityKind::Tangential);
  REQUIRE(tangential.certificate.has_value());
  REQUIRE(tangential.c1.has_value());
  CHECK(tangential.c1->pairwise_ok);

  RigidityVerdict spread = rigidity_classify(make_koch(), 1, config);
  CHECK(spread.kind == RigidityKind::Spread);
  REQUIRE(spread.witness.has_value());
  CHECK(spread.witness->mass >= spread.witness->required_mass);
}
