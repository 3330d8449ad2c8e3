#include "rigidlim/grassmann.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace rigidlim {

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

double min_singular(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

Subspace::Subspace(int dim_ambient, const Mat& spanning_columns)
    : d_(dim_ambient), l_(static_cast<int>(spanning_columns.cols())) {
  if (spanning_columns.rows() != d_) {
    throw DimensionError("spanning columns have wrong ambient dimension");
  }
  if (l_ <= 0 || l_ >= d_) {
    throw DimensionError("subspace dimension must satisfy 0 < l < d");
  }
  Eigen::JacobiSVD<Mat> svd(spanning_columns, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv(l_ - 1) < 1e-12 * std::max(1.0, sv(0))) {
    throw DegenerateCloudError("spanning columns are rank deficient");
  }
  basis_ = svd.matrixU().leftCols(l_);
}

Subspace Subspace::coordinate_plane(int dim_ambient, int l) {
  Mat b = Mat::Zero(dim_ambient, l);
  for (int k = 0; k < l; ++k) b(k, k) = 1.0;
  return Subspace(dim_ambient, b);
}

Subspace Subspace::random(int dim_ambient, int l, Rng& rng) {
  Mat b(dim_ambient, l);
  for (int c = 0; c < l; ++c) b.col(c) = rng.gaussian(dim_ambient);
  return Subspace(dim_ambient, b);
}

Mat Subspace::projector() const { return basis_ * basis_.transpose(); }

Mat Subspace::complement_projector() const {
  return Mat::Identity(d_, d_) - projector();
}

Subspace Subspace::complement() const {
  Eigen::SelfAdjointEigenSolver<Mat> eig(complement_projector());
  // eigenvalues ascending; the top d-l belong to V^perp
  return Subspace(d_, eig.eigenvectors().rightCols(d_ - l_));
}

Vec Subspace::project(const Vec& x) const {
  return basis_ * (basis_.transpose() * x);
}

double Subspace::complement_norm(const Vec& x) const {
  return (x - project(x)).norm();
}

double Subspace::project_norm(const Vec& x) const {
  return (basis_.transpose() * x).norm();
}

static void check_comparable(const Subspace& v, const Subspace& w) {
  if (v.dim_ambient() != w.dim_ambient() || v.dim() != w.dim()) {
    throw DimensionError("subspaces live in different Grassmannians");
  }
}

double metric(const Subspace& v, const Subspace& w) {
  check_comparable(v, w);
  return op_norm(v.complement_projector() - w.complement_projector());
}

double salli_distance(const Subspace& v, const Subspace& w) {
  check_comparable(v, w);
  // Q_W restricted to V: sup_{x in V, |x|=1} |Q_W x|
  return op_norm(w.complement_projector() * v.basis());
}

Cone::Cone(Vec apex, Subspace plane, double delta, std::optional<double> radius)
    : apex(std::move(apex)), plane(std::move(plane)), delta(delta),
      radius(radius) {
  if (delta <= 0.0 || delta >= 1.0) {
    throw PreconditionError("cone aperture delta must lie in (0,1)");
  }
  if (radius && *radius <= 0.0) {
    throw PreconditionError("cone truncation radius must be positive");
  }
}

Tube::Tube(Vec apex, Subspace plane, double width)
    : apex(std::move(apex)), plane(std::move(plane)), width(width) {
  if (width <= 0.0) throw PreconditionError("tube width must be positive");
}

bool cone_contains(const Cone& cone, const Vec& x) {
  const Vec rel = x - cone.apex;
  const double dist = rel.norm();
  if (cone.radius && dist >= *cone.radius) return false;
  // strict inequality: the apex itself is outside
  return cone.plane.complement_norm(rel) < std::sqrt(cone.delta) * dist;
}

bool tube_contains(const Tube& tube, const Vec& x) {
  return tube.plane.complement_norm(x - tube.apex) < tube.width;
}

Subspace map_subspace(const Mat& a, const Subspace& v) {
  if (min_singular(a) <= 1e-12) {
    throw SingularMapError("cannot map a subspace through a singular matrix");
  }
  return Subspace(v.dim_ambient(), a * v.basis());
}

Subspace fit_plane(const std::vector<Vec>& points,
                   const std::vector<double>& weights, const Vec& apex, int l) {
  if (points.size() != weights.size()) {
    throw DimensionError("points and weights differ in length");
  }
  const int d = static_cast<int>(apex.size());
  Mat moment = Mat::Zero(d, d);
  int positive = 0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (weights[k] < 0.0) throw PreconditionError("negative weight");
    if (weights[k] == 0.0) continue;
    ++positive;
    const Vec rel = points[k] - apex;
    moment += weights[k] * rel * rel.transpose();
  }
  if (positive < l) {
    throw DegenerateCloudError("fewer positively weighted points than l");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(moment);
  const auto& ev = eig.eigenvalues();  // ascending
  if (ev(d - l) < 1e-14 * std::max(1.0, ev(d - 1))) {
    throw DegenerateCloudError("moment matrix rank below l");
  }
  return Subspace(d, eig.eigenvectors().rightCols(l));
}

}  // namespace rigidlim
