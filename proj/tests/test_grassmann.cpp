#include <doctest.h>

#include <cmath>

#include "rigidlim/grassmann.hpp"

using namespace rigidlim;

namespace {

Subspace line2(double angle) {
  Mat m(2, 1);
  m << std::cos(angle), std::sin(angle);
  return Subspace(2, m);
}

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

}  // namespace

TEST_CASE("metric between planar lines is |sin of the angle|") {
  // Oracle: for lines at angles a, b the projector difference has
  // operator norm |sin(a-b)|.
  const double cases[][2] = {{0.0, 0.3}, {0.1, 1.2}, {-0.4, 0.9}, {0.0, M_PI_2}};
  for (auto [a, b] : cases) {
    CHECK(metric(line2(a), line2(b)) ==
          doctest::Approx(std::abs(std::sin(a - b))).epsilon(1e-12));
  }
}

TEST_CASE("metric equals Salli's identity") {
  Rng rng(11);
  for (auto [d, l] : {std::pair{2, 1}, {3, 1}, {3, 2}, {5, 2}, {6, 3}}) {
    for (int k = 0; k < 50; ++k) {
      Subspace v = Subspace::random(d, l, rng);
      Subspace w = Subspace::random(d, l, rng);
      CHECK(std::abs(metric(v, w) - salli_distance(v, w)) < 1e-9);
    }
  }
}

TEST_CASE("metric is a metric") {
  Rng rng(12);
  for (int k = 0; k < 40; ++k) {
    Subspace u = Subspace::random(4, 2, rng);
    Subspace v = Subspace::random(4, 2, rng);
    Subspace w = Subspace::random(4, 2, rng);
    CHECK(metric(u, u) < 1e-12);
    CHECK(std::abs(metric(u, v) - metric(v, u)) < 1e-12);
    CHECK(metric(u, w) <= metric(u, v) + metric(v, w) + 1e-9);
    CHECK(metric(u, v) <= 1.0 + 1e-12);
  }
}

TEST_CASE("cone membership around the x-axis") {
  Subspace x_axis = Subspace::coordinate_plane(2, 1);
  Cone cone(v2(0, 0), x_axis, 0.25);
  // |y| vs 0.5 * |(x,y)|: (1, 0.4) is inside, (1, 0.6) is outside.
  CHECK(cone_contains(cone, v2(1.0, 0.4)));
  CHECK_FALSE(cone_contains(cone, v2(1.0, 0.6)));
  CHECK(cone_contains(cone, v2(-1.0, 0.4)));
  // The apex itself is excluded (strict inequality).
  CHECK_FALSE(cone_contains(cone, v2(0, 0)));

  Cone truncated(v2(0, 0), x_axis, 0.25, 1.0);
  CHECK(cone_contains(truncated, v2(0.5, 0.1)));
  CHECK_FALSE(cone_contains(truncated, v2(2.0, 0.1)));
}

TEST_CASE("tube membership") {
  Subspace x_axis = Subspace::coordinate_plane(2, 1);
  Tube tube(v2(0, 0), x_axis, 0.1);
  CHECK(tube_contains(tube, v2(5.0, 0.05)));
  CHECK_FALSE(tube_contains(tube, v2(0.0, 0.2)));
}

TEST_CASE("projector complement identity") {
  Rng rng(13);
  for (int k = 0; k < 30; ++k) {
    Subspace v = Subspace::random(5, 2, rng);
    Vec x = rng.gaussian(5);
    const double p = v.project_norm(x);
    const double q = v.complement_norm(x);
    CHECK(p * p + q * q == doctest::Approx(x.squaredNorm()).epsilon(1e-10));
    // complement() realizes Q_V as the projector onto V-perp
    CHECK(v.complement().project_norm(x) == doctest::Approx(q).epsilon(1e-10));
  }
}

TEST_CASE("map_subspace is equivariant under isometries") {
  Rng rng(14);
  for (int k = 0; k < 20; ++k) {
    Subspace v = Subspace::random(3, 1, rng);
    Subspace w = Subspace::random(3, 1, rng);
    // random rotation from QR of a Gaussian matrix
    Mat g(3, 3);
    for (int r = 0; r < 3; ++r) g.row(r) = rng.gaussian(3).transpose();
    Eigen::HouseholderQR<Mat> qr(g);
    Mat rot = qr.householderQ();
    CHECK(metric(map_subspace(rot, v), map_subspace(rot, w)) ==
          doctest::Approx(metric(v, w)).epsilon(1e-9));
  }
}

TEST_CASE("map_subspace rejects singular images") {
  Subspace v = Subspace::coordinate_plane(2, 1);
  Mat singular = Mat::Zero(2, 2);
  CHECK_THROWS_AS(map_subspace(singular, v), SingularMapError);
}

TEST_CASE("fit_plane recovers an exact plane") {
  Rng rng(15);
  Mat span(3, 2);
  span << 1, 0, 0, 1, 2, -1;  // plane z = 2x - y
  Subspace truth(3, span);
  std::vector<Vec> pts;
  std::vector<double> wts;
  Vec apex = Vec::Zero(3);
  for (int k = 0; k < 40; ++k) {
    Vec c = rng.gaussian(2);
    pts.push_back(span.col(0) * c[0] + span.col(1) * c[1]);
    wts.push_back(rng.uniform(0.1, 1.0));
  }
  Subspace fitted = fit_plane(pts, wts, apex, 2);
  CHECK(metric(fitted, truth) < 1e-10);
}

TEST_CASE("fit_plane rejects degenerate clouds") {
  Vec apex = Vec::Zero(3);
  std::vector<Vec> pts{apex, apex};
  std::vector<double> wts{1.0, 1.0};
  CHECK_THROWS_AS(fit_plane(pts, wts, apex, 2), DegenerateCloudError);
}

TEST_CASE("subspace construction guards") {
  CHECK_THROWS_AS(Subspace(2, Mat::Zero(2, 1)), DegenerateCloudError);
  CHECK_THROWS_AS(Subspace(2, Mat::Ones(3, 1)), DimensionError);
}
