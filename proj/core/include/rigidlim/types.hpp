#pragma once

#include <Eigen/Dense>

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rigidlim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidWordError : public Error { using Error::Error; };
class CapacityError : public Error { using Error::Error; };
class DomainEscapeError : public Error { using Error::Error; };
class SingularMapError : public Error { using Error::Error; };
class DimensionError : public Error { using Error::Error; };
class DegenerateCloudError : public Error { using Error::Error; };
class ResolutionError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };
class InvalidWitnessError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

/// Construction of a conjugated system was rejected because the measured
/// norm product exceeds the admissible bound.
class ConstructionRejectedError : public Error {
 public:
  ConstructionRejectedError(const std::string& what, double norm_product,
                            double bound)
      : Error(what), norm_product(norm_product), bound(bound) {}
  double norm_product;
  double bound;
};

/// Largest singular value (operator norm) of a small dense matrix.
double op_norm(const Mat& m);

/// Smallest singular value; |A^{-1}|^{-1} when A is nonsingular.
double min_singular(const Mat& m);

/// Axis-aligned box, used for the seed set X and the working domains.
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Vec& x, double eps = 0.0) const {
    for (int k = 0; k < dim(); ++k) {
      if (x[k] < lo[k] - eps || x[k] > hi[k] + eps) return false;
    }
    return true;
  }

  bool interior_contains(const Vec& x, double eps = 0.0) const {
    for (int k = 0; k < dim(); ++k) {
      if (x[k] <= lo[k] + eps || x[k] >= hi[k] - eps) return false;
    }
    return true;
  }

  Box dilated(double margin) const {
    Box b{lo, hi};
    b.lo.array() -= margin;
    b.hi.array() += margin;
    return b;
  }

  Vec barycenter() const { return 0.5 * (lo + hi); }

  double diameter() const { return (hi - lo).norm(); }

  double shortest_side() const { return (hi - lo).minCoeff(); }

  /// All 2^d corners, in lexicographic bit order.
  std::vector<Vec> corners() const {
    const int d = dim();
    std::vector<Vec> out;
    out.reserve(std::size_t(1) << d);
    for (std::size_t mask = 0; mask < (std::size_t(1) << d); ++mask) {
      Vec c(d);
      for (int k = 0; k < d; ++k) c[k] = (mask >> k & 1) ? hi[k] : lo[k];
      out.push_back(std::move(c));
    }
    return out;
  }

  /// Grow to include a point.
  void absorb(const Vec& x) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
};

/// Seedable generator; every stochastic operation takes a seed so runs
/// are reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(gen_);
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return std::uniform_int_distribution<int>(lo, hi)(gen_);
  }

  Vec point_in_box(const Box& box) {
    Vec x(box.dim());
    for (int k = 0; k < box.dim(); ++k) x[k] = uniform(box.lo[k], box.hi[k]);
    return x;
  }

  Vec gaussian(int d) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec x(d);
    for (int k = 0; k < d; ++k) x[k] = n(gen_);
    return x;
  }

  Vec unit_vector(int d) {
    Vec x = gaussian(d);
    while (x.norm() < 1e-12) x = gaussian(d);
    return x / x.norm();
  }

  /// Uniform point in the open ball B(center, radius).
  Vec point_in_ball(const Vec& center, double radius) {
    const int d = static_cast<int>(center.size());
    Vec dir = unit_vector(d);
    double u = uniform(0.0, 1.0);
    return center + radius * std::pow(u, 1.0 / d) * dir;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace rigidlim
