#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "rigidlim/symbolic.hpp"
#include "rigidlim/types.hpp"

namespace rigidlim {

/// C^2 map contract: evaluation, Jacobian, and an inverse (needed for
/// overlap sampling and conjugation).
class SmoothMap {
 public:
  virtual ~SmoothMap() = default;

  virtual Vec eval(const Vec& x) const = 0;
  virtual Mat jacobian(const Vec& x) const = 0;
  virtual Vec inverse(const Vec& y) const = 0;
  virtual bool is_similarity() const { return false; }
};

using MapPtr = std::shared_ptr<const SmoothMap>;

/// x -> scale * orthogonal * x + translation.
class Similarity final : public SmoothMap {
 public:
  Similarity(double scale, Mat orthogonal, Vec translation);

  Vec eval(const Vec& x) const override;
  Mat jacobian(const Vec&) const override { return scale_ * orthogonal_; }
  Vec inverse(const Vec& y) const override;
  bool is_similarity() const override { return true; }

  double scale() const { return scale_; }
  const Mat& orthogonal() const { return orthogonal_; }
  const Vec& translation() const { return translation_; }

  /// True when the orthogonal part is a signed permutation, so axis-aligned
  /// boxes map to axis-aligned boxes.
  bool axis_aligned() const;

 private:
  double scale_;
  Mat orthogonal_;
  Vec translation_;
};

/// Plateau profile g: identically 1 below 1/3, identically c2 above 2/3,
/// quintic-smoothstep transition in between. C^2 with g', g'' vanishing
/// at the junctions; sup g' = (c2-1) * 45/8.
struct Deformation {
  double c2;

  explicit Deformation(double c2);

  double g(double z) const;
  double dg(double z) const;
  double ddg(double z) const;
  double sup_dg() const { return (c2 - 1.0) * 45.0 / 8.0; }
};

/// h(x,y,z) = g(z) * (x,y,z) on R^3. Inverse solved on the scalar
/// equation g(z) z = z~ by bisection.
class RadialDeformation {
 public:
  explicit RadialDeformation(Deformation profile) : profile_(profile) {}

  Vec eval(const Vec& p) const;
  Mat jacobian(const Vec& p) const;
  Vec inverse(const Vec& q) const;

  const Deformation& profile() const { return profile_; }

 private:
  double invert_z(double z_tilde) const;
  Deformation profile_;
};

/// h o inner o h^{-1}.
class ConjugatedMap final : public SmoothMap {
 public:
  ConjugatedMap(MapPtr inner, RadialDeformation h)
      : inner_(std::move(inner)), h_(std::move(h)) {}

  Vec eval(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  Vec inverse(const Vec& y) const override;

  const SmoothMap& inner() const { return *inner_; }
  const RadialDeformation& deformation() const { return h_; }

 private:
  MapPtr inner_;
  RadialDeformation h_;
};

/// The system of contractions together with its seed box and working
/// domains. Immutable after construction.
class IFSystem {
 public:
  IFSystem(int d, std::vector<MapPtr> maps, Box seed, double omega_margin,
           double s_low, double s_up, double rho0 = 0.0);

  int dim() const { return d_; }
  int map_count() const { return static_cast<int>(maps_.size()); }
  const SmoothMap& map(int i) const { return *maps_[std::size_t(i)]; }
  const std::vector<MapPtr>& maps() const { return maps_; }

  const Box& seed() const { return seed_; }
  Box omega() const { return seed_.dilated(omega_margin_); }
  Box omega_prime() const { return seed_.dilated(2.0 * omega_margin_); }
  double omega_margin() const { return omega_margin_; }

  double s_low() const { return s_low_; }
  double s_up() const { return s_up_; }
  double rho0() const { return rho0_; }

  Alphabet alphabet() const { return Alphabet(map_count()); }
  bool all_similarities() const;

  /// Estimated sup_{x in Omega} |phi_i'(x)|; exact for similarities.
  double sup_norm(int i) const { return sup_norms_[std::size_t(i)]; }
  /// Estimated inf_{x in Omega} |(phi_i'(x))^{-1}|^{-1}; exact for
  /// similarities.
  double inf_norm(int i) const { return inf_norms_[std::size_t(i)]; }

  double min_sup_norm() const;
  double min_inf_norm() const;

  /// Conservative lower bound on dist(E, boundary of Omega).
  double dist_limit_to_omega_boundary() const { return omega_margin_ / 2.0; }

 private:
  int d_;
  std::vector<MapPtr> maps_;
  Box seed_;
  double omega_margin_;
  double s_low_;
  double s_up_;
  double rho0_;
  std::vector<double> sup_norms_;
  std::vector<double> inf_norms_;
};

struct ComposeResult {
  Vec value;
  Mat jacobian;
};

/// phi_word = phi_{i1} o ... o phi_{in} evaluated at x, with the chain-rule
/// Jacobian. Throws DomainEscapeError if an intermediate point leaves
/// Omega'.
ComposeResult compose(const IFSystem& system, const Word& word, const Vec& x);

/// Finite-prefix approximation of pi: the anchor image phi_word(x0) with a
/// certified bound on diam(X_word).
struct CodedPoint {
  Word word;
  Vec point;
  double radius_bound;
};

CodedPoint project(const IFSystem& system, const Word& word);

/// Upper bound diam(X) * prod_k sup_norm(i_k) on diam(X_word).
double cylinder_radius_bound(const IFSystem& system, const Word& word);

/// All depth-n representatives in lexicographic word order.
std::vector<CodedPoint> cylinder_representatives(const IFSystem& system,
                                                 int depth);

// ---- validators ------------------------------------------------------

struct F1Report {
  bool ok = true;
  double worst_upper = 0.0;  // max observed |phi'| (must be <= s_up)
  double worst_lower = 1.0;  // min observed |(phi')^{-1}|^{-1} (must be >= s_low)
};

F1Report validate_f1(const IFSystem& system, int sample_count,
                     std::uint64_t seed);

struct F3Report {
  bool ok = true;
  double max_defect = 0.0;  // max over maps/points of sigma_max/sigma_min - 1
};

F3Report validate_f3(const IFSystem& system, int depth, double tol);

struct OscReport {
  bool ok = true;
  bool certified = false;  // exact box argument vs interior sampling
  std::vector<std::pair<int, int>> overlap_pairs;
};

OscReport validate_osc(const IFSystem& system, int grid_resolution);

struct BoundaryDensityReport {
  bool ok = true;
  double min_ratio = 1.0;
};

/// Monte-Carlo estimate of the boundary density infimum over sampled
/// boundary points and radii below rho0.
BoundaryDensityReport validate_boundary_density(const IFSystem& system,
                                                int radius_count,
                                                int sample_count,
                                                std::uint64_t seed);

// ---- distortion ------------------------------------------------------

struct DistortionConstants {
  double c_hat = 0.0;   // derivative-variation constant
  double k0_hat = 1.0;  // bounded-distortion constant
  double d_hat = 1.0;   // diameter-vs-norm constant
  int depth = 0;
  int sample_count = 0;
};

DistortionConstants distortion_constants(const IFSystem& system, int depth,
                                         int sample_count, std::uint64_t seed);

struct BallInclusionViolation {
  Word word;
  Vec center;
  double radius;
  int which;  // 1 = inner inclusion, 2 = outer inclusion
  double defect;
};

struct BallInclusionReport {
  int trials = 0;
  std::vector<BallInclusionViolation> violations;
};

/// Samples the two ball inclusions around cylinder representatives.
BallInclusionReport check_ball_inclusions(const IFSystem& system,
                                          const DistortionConstants& constants,
                                          int trial_count, std::uint64_t seed);

// ---- conjugated-system builder ---------------------------------------

struct HOletusCheck {
  double norm_product = 1.0;  // measured sup|h'| * sup|(h^{-1})'|
  double bound = 1.0;         // admissible upper bound
  bool accepted = false;
};

/// Grid maximization of the deformation norm product against the
/// admissible bound for the given base system.
HOletusCheck measure_h_oletus(const IFSystem& base, double c2, double s_low,
                              double s_up, int grid_resolution);

struct ConjugationResult {
  IFSystem system;
  HOletusCheck check;
};

/// Builds { h o phi_i o h^{-1} } over the deformed seed box. Throws
/// ConstructionRejectedError when the norm product exceeds the bound.
ConjugationResult build_conjugated(const IFSystem& base, double c2,
                                   double s_low, double s_up,
                                   int grid_resolution);

}  // namespace rigidlim
