#pragma once

#include <optional>
#include <vector>

#include "rigidlim/types.hpp"

namespace rigidlim {

/// Element of G(d,l), stored as an orthonormal basis. Projections are
/// derived on demand; bases compose more stably under linear images
/// than projection matrices do.
class Subspace {
 public:
  /// Orthonormalizes the given spanning columns.
  Subspace(int dim_ambient, const Mat& spanning_columns);

  static Subspace coordinate_plane(int dim_ambient, int l);
  static Subspace random(int dim_ambient, int l, Rng& rng);

  int dim_ambient() const { return d_; }
  int dim() const { return l_; }
  const Mat& basis() const { return basis_; }

  Mat projector() const;             // P_V
  Mat complement_projector() const;  // Q_V = I - P_V
  Subspace complement() const;       // V^perp in G(d, d-l)

  Vec project(const Vec& x) const;          // P_V x
  double complement_norm(const Vec& x) const;  // |Q_V x|
  double project_norm(const Vec& x) const;     // |P_V x|

 private:
  int d_;
  int l_;
  Mat basis_;  // d x l, orthonormal columns
};

/// d(V,W) = |Q_V - Q_W|, the projection metric on G(d,l).
double metric(const Subspace& v, const Subspace& w);

/// Salli's identity d(V,W) = sup_{x in V, |x|=1} dist(x, W), computed as
/// the largest singular value of Q_W restricted to V.
double salli_distance(const Subspace& v, const Subspace& w);

/// Cone X(a,V,delta) = { x : |Q_V(x-a)| < delta^{1/2} |x-a| }, optionally
/// truncated to B(a,r).
struct Cone {
  Vec apex;
  Subspace plane;
  double delta;
  std::optional<double> radius;

  Cone(Vec apex, Subspace plane, double delta,
       std::optional<double> radius = std::nullopt);
};

/// Tube V_a(delta) = { x : |Q_V(x-a)| < delta }.
struct Tube {
  Vec apex;
  Subspace plane;
  double width;

  Tube(Vec apex, Subspace plane, double width);
};

bool cone_contains(const Cone& cone, const Vec& x);
bool tube_contains(const Tube& tube, const Vec& x);

/// Image subspace AV for a nonsingular A.
Subspace map_subspace(const Mat& a, const Subspace& v);

/// l-plane through `apex` minimizing the weighted squared complement
/// residual over the cloud; top-l spectral directions of the second
/// moment matrix about the apex.
Subspace fit_plane(const std::vector<Vec>& points,
                   const std::vector<double>& weights, const Vec& apex, int l);

}  // namespace rigidlim
