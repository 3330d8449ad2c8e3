#include "rigidlim/measure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>

namespace rigidlim {

namespace {

std::uint64_t lexicographic_index(const Word& word, int alphabet_size) {
  std::uint64_t idx = 0;
  for (int k = 0; k < word.length(); ++k) {
    idx = idx * std::uint64_t(alphabet_size) + std::uint64_t(word[k]);
  }
  return idx;
}

std::uint64_t power(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int k = 0; k < exp; ++k) out *= base;
  return out;
}

double min_map_scale(const IFSystem& system) {
  double s = 1.0;
  for (int i = 0; i < system.map_count(); ++i) {
    s = std::min(s, system.inf_norm(i));
  }
  return s;
}

// Cylinder DFS sharing sample points and chain-rule Jacobians. The word
// grows at the front (phi_{(i,w)} = phi_i o phi_w), so each recursion level
// applies one map to the parent's samples.
struct CylinderScan {
  const IFSystem& system;
  int depth;
  PressureTable& table;
  std::vector<Vec> samples;  // anchor last

  void run() {
    const std::uint64_t total =
        power(std::uint64_t(system.map_count()), depth);
    table.sup_norms.assign(total, 0.0);
    table.inf_norms.assign(total, 0.0);
    table.representatives.assign(total, Vec());
    table.anchor_norms.assign(total, 0.0);
    table.radius_bounds.assign(total, 0.0);

    std::vector<Mat> identity(samples.size(),
                              Mat::Identity(system.dim(), system.dim()));
    recurse(samples, identity, 0, 0, system.seed().diameter());
  }

  // Chooses the *last* symbol first: at recursion level L the chosen symbol
  // sits at word position depth-1-L, contributing s * m^L to the index.
  void recurse(const std::vector<Vec>& points, const std::vector<Mat>& jacs,
               int level, std::uint64_t index, double radius_bound) {
    if (level == depth) {
      double sup = 0.0;
      double inf = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < points.size(); ++k) {
        sup = std::max(sup, op_norm(jacs[k]));
        inf = std::min(inf, min_singular(jacs[k]));
      }
      table.sup_norms[index] = sup * table.k0;
      table.inf_norms[index] = inf / table.k0;
      table.representatives[index] = points.back();
      table.anchor_norms[index] = op_norm(jacs.back());
      table.radius_bounds[index] = radius_bound;
      return;
    }
    const std::uint64_t stride = power(std::uint64_t(system.map_count()),
                                       depth - 1 - level);
    std::vector<Vec> next_points(points.size());
    std::vector<Mat> next_jacs(points.size());
    for (int i = 0; i < system.map_count(); ++i) {
      const SmoothMap& map = system.map(i);
      for (std::size_t k = 0; k < points.size(); ++k) {
        next_jacs[k] = map.jacobian(points[k]) * jacs[k];
        next_points[k] = map.eval(points[k]);
      }
      recurse(next_points, next_jacs, level + 1,
              index + std::uint64_t(i) * stride,
              radius_bound * system.sup_norm(i));
    }
  }
};

}  // namespace

std::uint64_t PressureTable::index_of(const Word& word) const {
  if (word.length() != depth) {
    throw InvalidWordError("word length does not match table depth");
  }
  return lexicographic_index(word, alphabet_size);
}

PressureTable build_pressure_table(const IFSystem& system, int depth) {
  if (depth < 1) throw PreconditionError("depth must be >= 1");
  count_cylinders(system.alphabet(), depth);

  PressureTable table;
  table.depth = depth;
  table.alphabet_size = system.map_count();
  if (system.all_similarities()) {
    table.k0 = 1.0;
  } else {
    const auto constants =
        distortion_constants(system, std::min(depth, 3), 12, 0x5ca1ab1eULL);
    table.k0 = constants.k0_hat;
  }

  CylinderScan scan{system, depth, table, {}};
  scan.samples = system.seed().corners();
  scan.samples.push_back(system.seed().barycenter());
  scan.run();
  return table;
}

std::pair<double, double> pressure_sums(const IFSystem& system, double t,
                                        int depth) {
  if (t < 0.0) throw PreconditionError("exponent t must be nonnegative");
  const PressureTable table = build_pressure_table(system, depth);
  double lower = 0.0;
  double upper = 0.0;
  for (std::size_t k = 0; k < table.size(); ++k) {
    lower += std::pow(table.inf_norms[k], t);
    upper += std::pow(table.sup_norms[k], t);
  }
  return {lower, upper};
}

namespace {

// Root of f(t) = 1 for strictly decreasing f, bisection on [0, d].
double bisect_unit_root(const std::function<double(double)>& f, double d,
                        double tol) {
  double lo = 0.0;
  double hi = d;
  if (f(hi) > 1.0) return d;
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

DimensionBracket estimate_dimension(const IFSystem& system, int depth,
                                    double tol) {
  if (depth < 1) throw PreconditionError("depth must be >= 1");
  if (tol <= 0.0) throw PreconditionError("tolerance must be positive");
  DimensionBracket bracket;
  bracket.depth = depth;

  if (system.all_similarities()) {
    bracket.exact_similarity = true;
    std::vector<double> ratios;
    for (int i = 0; i < system.map_count(); ++i) {
      ratios.push_back(system.sup_norm(i));
    }
    const double root = bisect_unit_root(
        [&](double t) {
          double s = 0.0;
          for (double r : ratios) s += std::pow(r, t);
          return s;
        },
        double(system.dim()), tol);
    bracket.t_minus = bracket.t_plus = root;
    return bracket;
  }

  const PressureTable table = build_pressure_table(system, depth);
  const double inv_n = 1.0 / double(depth);
  auto normalized_sum = [&](const std::vector<double>& norms, double t) {
    double s = 0.0;
    for (double v : norms) s += std::pow(v, t);
    return std::pow(s, inv_n);
  };
  bracket.t_plus = bisect_unit_root(
      [&](double t) { return normalized_sum(table.sup_norms, t); },
      double(system.dim()), tol);
  bracket.t_minus = bisect_unit_root(
      [&](double t) { return normalized_sum(table.inf_norms, t); },
      double(system.dim()), tol);
  bracket.t_minus = std::min(bracket.t_minus, bracket.t_plus);
  return bracket;
}

std::uint64_t CylinderWeights::index_of(const Word& word) const {
  if (word.length() != depth) {
    throw InvalidWordError("word length does not match weight depth");
  }
  return lexicographic_index(word, alphabet_size);
}

Word CylinderWeights::word_at(std::uint64_t index) const {
  std::vector<int> symbols(std::size_t(depth), 0);
  for (int k = depth - 1; k >= 0; --k) {
    symbols[std::size_t(k)] = int(index % std::uint64_t(alphabet_size));
    index /= std::uint64_t(alphabet_size);
  }
  return Word(std::move(symbols));
}

double CylinderWeights::prefix_mass(const Word& prefix) const {
  if (prefix.length() > depth) {
    throw InvalidWordError("prefix longer than weight depth");
  }
  const std::uint64_t block =
      power(std::uint64_t(alphabet_size), depth - prefix.length());
  const std::uint64_t start =
      lexicographic_index(prefix, alphabet_size) * block;
  double mass = 0.0;
  for (std::uint64_t k = start; k < start + block; ++k) {
    mass += weights[k];
  }
  return mass;
}

double CylinderWeights::ball_mass(const Vec& center, double radius) const {
  double mass = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if ((points[k] - center).norm() + radius_bounds[k] < radius) {
      mass += weights[k];
    }
  }
  return mass;
}

CylinderWeights conformal_weights(const IFSystem& system, double t,
                                  int depth) {
  if (t < 0.0) throw PreconditionError("exponent t must be nonnegative");
  const PressureTable table = build_pressure_table(system, depth);

  CylinderWeights weights;
  weights.depth = depth;
  weights.alphabet_size = system.map_count();
  weights.t = t;
  weights.points = table.representatives;
  weights.radius_bounds = table.radius_bounds;
  weights.weights.resize(table.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < table.size(); ++k) {
    weights.weights[k] = std::pow(table.anchor_norms[k], t);
    sum += weights.weights[k];
  }
  weights.raw_sum = sum;
  for (auto& w : weights.weights) w /= sum;
  return weights;
}

double verify_conformal_identity(const IFSystem& system,
                                 const CylinderWeights& weights,
                                 const Word& word) {
  if (word.length() + weights.depth > 24) {
    throw CapacityError("combined depth beyond the enumeration cap");
  }
  const double lhs = weights.prefix_mass(word);
  double rhs = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const Mat jac = compose(system, word, weights.points[k]).jacobian;
    rhs += weights.weights[k] * std::pow(op_norm(jac), weights.t);
  }
  return std::abs(lhs - rhs);
}

AhlforsReport ahlfors_lower_check(const IFSystem& system,
                                  const CylinderWeights& weights,
                                  const DistortionConstants& constants,
                                  int sample_count, int radii_per_sample,
                                  std::uint64_t seed, double r_min,
                                  double r_max) {
  Rng rng(seed);
  AhlforsReport report;
  const double t = weights.t;
  double scale_pow = std::pow(min_map_scale(system), t);
  // When every map shares one ratio s and t solves the Moran equation,
  // s^t = 1/|I| exactly; snap away the pow() rounding.
  if (system.all_similarities()) {
    const double m = double(system.map_count());
    bool equal_ratio = true;
    for (int i = 0; i < system.map_count(); ++i)
      equal_ratio = equal_ratio && system.inf_norm(i) == system.inf_norm(0);
    if (equal_ratio && std::abs(scale_pow * m - 1.0) < 1e-9)
      scale_pow = 1.0 / m;
  }
  report.c_formula = std::pow(constants.d_hat, -t) *
                     std::pow(constants.k0_hat, -2.0 * t) * scale_pow;

  const double max_bound =
      *std::max_element(weights.radius_bounds.begin(),
                        weights.radius_bounds.end());
  if (r_max <= 0.0) r_max = system.rho0();
  if (r_min <= 0.0) {
    // conservative inner sums lose boundary cylinders; keep radii well
    // above the cylinder scale so the loss stays a small fraction
    r_min = (system.dim() == 1 ? 300.0 : 15.0) * max_bound;
  }
  if (r_min <= 2.0 * max_bound) {
    throw ResolutionError("radii below the resolvable cylinder scale");
  }
  if (r_min >= r_max) {
    throw ResolutionError("no admissible radii between cylinder scale and rho0");
  }

  report.r_min = r_min;
  report.r_max = r_max;
  report.min_observed_ratio = std::numeric_limits<double>::infinity();
  const double log_lo = std::log(r_min);
  const double log_hi = std::log(r_max);
  for (int s = 0; s < sample_count; ++s) {
    const auto k = std::uint64_t(
        rng.uniform_int(0, int(weights.size()) - 1));
    const Vec& x = weights.points[k];
    for (int j = 0; j < radii_per_sample; ++j) {
      const double r = std::exp(rng.uniform(log_lo, log_hi));
      const double ratio = weights.ball_mass(x, r) / std::pow(r, t);
      report.min_observed_ratio = std::min(report.min_observed_ratio, ratio);
      ++report.samples;
    }
  }
  report.ok = report.min_observed_ratio >= report.c_formula;
  return report;
}

double descend_ball_mass(const IFSystem& system, double t, const Vec& center,
                         double radius, int max_depth) {
  const Vec anchor = system.seed().barycenter();
  double mass = 0.0;
  // nesting refines by appending symbols, so each node recomputes its
  // composition; pruning keeps the visited tree small
  auto recurse = [&](auto&& self, const Word& word) -> void {
    const auto at = compose(system, word, anchor);
    const double bound = cylinder_radius_bound(system, word);
    const double dist = (at.value - center).norm();
    if (dist - bound >= radius) return;  // wholly outside
    if (dist + bound < radius) {
      mass += std::pow(op_norm(at.jacobian), t);
      return;
    }
    if (word.length() >= max_depth) return;  // unresolved boundary, drop
    for (int i = 0; i < system.map_count(); ++i) {
      Word child = word;
      child.append(i);
      self(self, child);
    }
  };
  for (int i = 0; i < system.map_count(); ++i) {
    recurse(recurse, Word(std::vector<int>{i}));
  }
  return mass;
}

void write_weights_csv(std::ostream& out, const CylinderWeights& weights) {
  out << "word,weight";
  const int d = weights.points.empty() ? 0 : int(weights.points.front().size());
  for (int k = 1; k <= d; ++k) out << ",x" << k;
  out << "\n";
  out.precision(17);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    out << weights.word_at(k).to_string() << "," << weights.weights[k];
    for (int c = 0; c < d; ++c) out << "," << weights.points[k][c];
    out << "\n";
  }
}

}  // namespace rigidlim
