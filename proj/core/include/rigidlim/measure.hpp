#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rigidlim/ifs.hpp"

namespace rigidlim {

/// Per-cylinder derivative-norm envelopes at a fixed depth, the raw
/// material for pressure sums. Entries are indexed lexicographically by
/// word. For non-similarity systems the sampled norms are inflated /
/// deflated by the distortion factor so they bracket the true envelope.
struct PressureTable {
  int depth = 0;
  int alphabet_size = 0;
  double k0 = 1.0;
  std::vector<double> sup_norms;   // >= sup over the cylinder of |phi_word'|
  std::vector<double> inf_norms;   // <= inf of |(phi_word')^{-1}|^{-1}
  std::vector<Vec> representatives;       // phi_word(anchor)
  std::vector<double> anchor_norms;       // |phi_word'(anchor)|
  std::vector<double> radius_bounds;

  std::size_t size() const { return sup_norms.size(); }
  std::uint64_t index_of(const Word& word) const;
};

PressureTable build_pressure_table(const IFSystem& system, int depth);

/// lower = sum inf^t, upper = sum sup^t over depth-n cylinders. Both are
/// strictly decreasing in t.
std::pair<double, double> pressure_sums(const IFSystem& system, double t,
                                        int depth);

struct DimensionBracket {
  double t_minus = 0.0;
  double t_plus = 0.0;
  int depth = 0;
  bool exact_similarity = false;

  double midpoint() const { return 0.5 * (t_minus + t_plus); }
  double width() const { return t_plus - t_minus; }
};

/// Bisection roots of the normalized pressure sums. For similarity systems
/// both roots coincide with the Moran-equation root of sum r_i^t = 1.
DimensionBracket estimate_dimension(const IFSystem& system, int depth,
                                    double tol);

/// Depth-n approximation of the conformal measure: normalized weights
/// |phi_word'(anchor)|^t on the cylinder tree.
struct CylinderWeights {
  int depth = 0;
  int alphabet_size = 0;
  double t = 0.0;
  double raw_sum = 0.0;                 // normalization constant
  std::vector<double> weights;          // normalized, sum 1
  std::vector<Vec> points;              // cylinder representatives
  std::vector<double> radius_bounds;

  std::size_t size() const { return weights.size(); }
  std::uint64_t index_of(const Word& word) const;
  Word word_at(std::uint64_t index) const;

  /// Total weight of cylinders prefixed by the given word; prefix blocks
  /// are contiguous in lexicographic order.
  double prefix_mass(const Word& prefix) const;

  /// Conservative mass of B(center, radius): sums cylinders whose
  /// representative ball lies wholly inside the ball.
  double ball_mass(const Vec& center, double radius) const;
};

CylinderWeights conformal_weights(const IFSystem& system, double t, int depth);

/// | m_n(cylinder) - sum_k w_k |phi_word'(x_k)|^t |, the finite-depth
/// defect of the conformal identity on one cylinder.
double verify_conformal_identity(const IFSystem& system,
                                 const CylinderWeights& weights,
                                 const Word& word);

struct AhlforsReport {
  double c_formula = 0.0;
  double min_observed_ratio = 0.0;
  int samples = 0;
  double r_min = 0.0;
  double r_max = 0.0;
  bool ok = false;
};

/// Checks the lower Ahlfors bound m(B(x,r)) >= C r^t against the
/// finite-depth measure, with the conservative inner ball mass.
AhlforsReport ahlfors_lower_check(const IFSystem& system,
                                  const CylinderWeights& weights,
                                  const DistortionConstants& constants,
                                  int sample_count, int radii_per_sample,
                                  std::uint64_t seed, double r_min = 0.0,
                                  double r_max = 0.0);

/// Conservative raw-weight mass of B(center, radius) by adaptive descent
/// of the cylinder tree, refining until cylinders resolve the ball or
/// max_depth is reached. Raw weights; at the exact dimension of a
/// similarity system each level sums to 1.
double descend_ball_mass(const IFSystem& system, double t, const Vec& center,
                         double radius, int max_depth);

/// CSV export: word, weight, representative coordinates.
void write_weights_csv(std::ostream& out, const CylinderWeights& weights);

}  // namespace rigidlim
