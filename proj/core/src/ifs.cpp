#include "rigidlim/ifs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rigidlim {

// ---- Similarity --------------------------------------------------------

Similarity::Similarity(double scale, Mat orthogonal, Vec translation)
    : scale_(scale), orthogonal_(std::move(orthogonal)),
      translation_(std::move(translation)) {
  if (scale_ <= 0.0 || scale_ >= 1.0) {
    throw ConfigError("similarity scale must lie in (0,1)");
  }
  const int d = static_cast<int>(translation_.size());
  if (orthogonal_.rows() != d || orthogonal_.cols() != d) {
    throw DimensionError("orthogonal part has wrong shape");
  }
  const Mat defect =
      orthogonal_.transpose() * orthogonal_ - Mat::Identity(d, d);
  if (defect.cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("similarity orthogonal part is not orthogonal");
  }
}

Vec Similarity::eval(const Vec& x) const {
  return scale_ * (orthogonal_ * x) + translation_;
}

Vec Similarity::inverse(const Vec& y) const {
  return orthogonal_.transpose() * (y - translation_) / scale_;
}

bool Similarity::axis_aligned() const {
  for (int r = 0; r < orthogonal_.rows(); ++r) {
    for (int c = 0; c < orthogonal_.cols(); ++c) {
      const double a = std::abs(orthogonal_(r, c));
      if (a > 1e-12 && std::abs(a - 1.0) > 1e-12) return false;
    }
  }
  return true;
}

// ---- Deformation -------------------------------------------------------

namespace {

// quintic smoothstep on [0,1]
double smoothstep(double u) { return ((6.0 * u - 15.0) * u + 10.0) * u * u * u; }
double smoothstep_d(double u) { return ((30.0 * u - 60.0) * u + 30.0) * u * u; }
double smoothstep_dd(double u) { return ((120.0 * u - 180.0) * u + 60.0) * u; }

}  // namespace

Deformation::Deformation(double c2) : c2(c2) {
  if (c2 < 1.0) throw ConfigError("deformation plateau c2 must be >= 1");
}

double Deformation::g(double z) const {
  if (z <= 1.0 / 3.0) return 1.0;
  if (z >= 2.0 / 3.0) return c2;
  return 1.0 + (c2 - 1.0) * smoothstep(3.0 * z - 1.0);
}

double Deformation::dg(double z) const {
  if (z <= 1.0 / 3.0 || z >= 2.0 / 3.0) return 0.0;
  return 3.0 * (c2 - 1.0) * smoothstep_d(3.0 * z - 1.0);
}

double Deformation::ddg(double z) const {
  if (z <= 1.0 / 3.0 || z >= 2.0 / 3.0) return 0.0;
  return 9.0 * (c2 - 1.0) * smoothstep_dd(3.0 * z - 1.0);
}

// ---- RadialDeformation -------------------------------------------------

Vec RadialDeformation::eval(const Vec& p) const {
  if (p.size() != 3) throw DimensionError("radial deformation lives on R^3");
  return profile_.g(p[2]) * p;
}

Mat RadialDeformation::jacobian(const Vec& p) const {
  if (p.size() != 3) throw DimensionError("radial deformation lives on R^3");
  const double g = profile_.g(p[2]);
  const double dg = profile_.dg(p[2]);
  Mat j = g * Mat::Identity(3, 3);
  j.col(2) += dg * p;
  return j;
}

double RadialDeformation::invert_z(double z_tilde) const {
  if (z_tilde <= 1.0 / 3.0) return z_tilde;  // g == 1 there
  // g(z) z is strictly increasing for z >= 1/3; bracket [1/3, z_tilde]
  double lo = 1.0 / 3.0;
  double hi = z_tilde;
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, z_tilde);
       ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (profile_.g(mid) * mid < z_tilde) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Vec RadialDeformation::inverse(const Vec& q) const {
  if (q.size() != 3) throw DimensionError("radial deformation lives on R^3");
  const double z = invert_z(q[2]);
  return q / profile_.g(z);
}

// ---- ConjugatedMap -----------------------------------------------------

Vec ConjugatedMap::eval(const Vec& x) const {
  return h_.eval(inner_->eval(h_.inverse(x)));
}

Mat ConjugatedMap::jacobian(const Vec& x) const {
  const Vec p = h_.inverse(x);
  const Vec q = inner_->eval(p);
  return h_.jacobian(q) * inner_->jacobian(p) * h_.jacobian(p).inverse();
}

Vec ConjugatedMap::inverse(const Vec& y) const {
  return h_.eval(inner_->inverse(h_.inverse(y)));
}

// ---- IFSystem ----------------------------------------------------------

IFSystem::IFSystem(int d, std::vector<MapPtr> maps, Box seed,
                   double omega_margin, double s_low, double s_up, double rho0)
    : d_(d), maps_(std::move(maps)), seed_(std::move(seed)),
      omega_margin_(omega_margin), s_low_(s_low), s_up_(s_up), rho0_(rho0) {
  if (d_ < 1) throw ConfigError("ambient dimension must be positive");
  if (maps_.empty()) throw ConfigError("system needs at least one map");
  if (seed_.dim() != d_) throw ConfigError("seed box has wrong dimension");
  if ((seed_.hi - seed_.lo).minCoeff() <= 0.0) {
    throw ConfigError("seed box is degenerate");
  }
  if (omega_margin_ <= 0.0) throw ConfigError("omega margin must be positive");
  if (s_low_ <= 0.0 || s_low_ >= 1.0 || s_up_ <= 0.0 || s_up_ >= 1.0) {
    throw ConfigError("contraction constants must lie in (0,1)");
  }
  if (s_up_ * s_up_ > s_low_ + 1e-12) {
    throw ConfigError("condition F1 needs s_up^2 <= s_low");
  }
  if (rho0_ <= 0.0) rho0_ = 0.5 * seed_.shortest_side();

  // maps(X) subset of X, sampled on corners / center / a coarse grid
  std::vector<Vec> probes = seed_.corners();
  probes.push_back(seed_.barycenter());
  Rng rng(0x9e3779b97f4a7c15ULL);
  for (int k = 0; k < 32; ++k) probes.push_back(rng.point_in_box(seed_));
  for (const auto& map : maps_) {
    for (const auto& p : probes) {
      if (!seed_.contains(map->eval(p), 1e-9)) {
        throw ConfigError("a map does not keep the seed box invariant");
      }
    }
  }

  // cache per-map norm envelopes over Omega
  sup_norms_.resize(maps_.size());
  inf_norms_.resize(maps_.size());
  const Box om = omega();
  std::vector<Vec> grid = om.corners();
  grid.push_back(om.barycenter());
  for (int k = 0; k < 200; ++k) grid.push_back(rng.point_in_box(om));
  if (d_ == 3) {
    // extra resolution across the deformation transition band
    for (int k = 0; k < 100; ++k) {
      Vec p = rng.point_in_box(om);
      p[2] = rng.uniform(1.0 / 3.0, 2.0 / 3.0);
      grid.push_back(p);
    }
  }
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    if (const auto* sim = dynamic_cast<const Similarity*>(maps_[i].get())) {
      sup_norms_[i] = inf_norms_[i] = sim->scale();
      continue;
    }
    double sup = 0.0;
    double inf = std::numeric_limits<double>::infinity();
    for (const auto& p : grid) {
      const Mat j = maps_[i]->jacobian(p);
      sup = std::max(sup, op_norm(j));
      inf = std::min(inf, min_singular(j));
    }
    sup_norms_[i] = sup * 1.01;
    inf_norms_[i] = inf * 0.99;
  }
}

bool IFSystem::all_similarities() const {
  return std::all_of(maps_.begin(), maps_.end(),
                     [](const MapPtr& m) { return m->is_similarity(); });
}

double IFSystem::min_sup_norm() const {
  return *std::min_element(sup_norms_.begin(), sup_norms_.end());
}

double IFSystem::min_inf_norm() const {
  return *std::min_element(inf_norms_.begin(), inf_norms_.end());
}

// ---- composition and projection ----------------------------------------

ComposeResult compose(const IFSystem& system, const Word& word, const Vec& x) {
  if (!word.valid_over(system.alphabet())) {
    throw InvalidWordError("word symbol out of alphabet range");
  }
  const Box op = system.omega_prime();
  if (!op.contains(x, 1e-9)) {
    throw DomainEscapeError("composition input outside Omega'");
  }
  Vec value = x;
  Mat jac = Mat::Identity(system.dim(), system.dim());
  for (int k = word.length() - 1; k >= 0; --k) {
    const SmoothMap& map = system.map(word[k]);
    jac = map.jacobian(value) * jac;
    value = map.eval(value);
    if (!op.contains(value, 1e-9)) {
      throw DomainEscapeError("intermediate composition point escaped Omega'");
    }
  }
  return {std::move(value), std::move(jac)};
}

double cylinder_radius_bound(const IFSystem& system, const Word& word) {
  double bound = system.seed().diameter();
  for (int k = 0; k < word.length(); ++k) bound *= system.sup_norm(word[k]);
  return bound;
}

CodedPoint project(const IFSystem& system, const Word& word) {
  if (word.is_empty()) {
    throw InvalidWordError("projection needs a nonempty word");
  }
  Vec value = system.seed().barycenter();
  for (int k = word.length() - 1; k >= 0; --k) {
    value = system.map(word[k]).eval(value);
  }
  return {word, std::move(value), cylinder_radius_bound(system, word)};
}

// ---- validators ----------------------------------------------------------

F1Report validate_f1(const IFSystem& system, int sample_count,
                     std::uint64_t seed) {
  if (sample_count < 1) throw PreconditionError("sample_count must be >= 1");
  Rng rng(seed);
  const Box om = system.omega();
  F1Report report;
  report.worst_upper = 0.0;
  report.worst_lower = std::numeric_limits<double>::infinity();
  std::vector<Vec> samples = om.corners();
  samples.push_back(om.barycenter());
  for (int k = 0; k < sample_count; ++k) samples.push_back(rng.point_in_box(om));
  for (int i = 0; i < system.map_count(); ++i) {
    for (const auto& x : samples) {
      const Mat j = system.map(i).jacobian(x);
      const double smax = op_norm(j);
      const double smin = min_singular(j);
      if (smin < 1e-14) throw SingularMapError("singular Jacobian at a sample");
      report.worst_upper = std::max(report.worst_upper, smax);
      report.worst_lower = std::min(report.worst_lower, smin);
    }
  }
  report.ok = report.worst_upper <= system.s_up() + 1e-12 &&
              report.worst_lower >= system.s_low() - 1e-12 &&
              system.s_up() * system.s_up() <= system.s_low() + 1e-12;
  return report;
}

namespace {

// Enumeration of cylinder representatives phi_word(anchor), lexicographic
// in the word. Representatives at depth n are phi_i(rep_{n-1}) with word
// (i, rest), so building level by level keeps the order lexicographic and
// shares all intermediate evaluations. Calls fn(word, point).
template <typename Fn>
void for_each_representative(const IFSystem& system, int depth, Fn&& fn) {
  std::vector<Vec> level_points{system.seed().barycenter()};
  std::vector<Word> level_words{Word::empty()};
  for (int level = 0; level < depth; ++level) {
    std::vector<Vec> next_points;
    std::vector<Word> next_words;
    next_points.reserve(level_points.size() * std::size_t(system.map_count()));
    next_words.reserve(next_points.capacity());
    for (int i = 0; i < system.map_count(); ++i) {
      Word prefix(std::vector<int>{i});
      for (std::size_t k = 0; k < level_points.size(); ++k) {
        next_points.push_back(system.map(i).eval(level_points[k]));
        next_words.push_back(concat(prefix, level_words[k]));
      }
    }
    level_points.swap(next_points);
    level_words.swap(next_words);
  }
  for (std::size_t k = 0; k < level_points.size(); ++k) {
    fn(level_words[k], level_points[k]);
  }
}

}  // namespace

std::vector<CodedPoint> cylinder_representatives(const IFSystem& system,
                                                 int depth) {
  count_cylinders(system.alphabet(), depth);  // capacity guard
  std::vector<CodedPoint> out;
  for_each_representative(system, depth, [&](const Word& w, const Vec& p) {
    out.push_back({w, p, cylinder_radius_bound(system, w)});
  });
  return out;
}

F3Report validate_f3(const IFSystem& system, int depth, double tol) {
  if (depth < 1) throw PreconditionError("depth must be >= 1");
  F3Report report;
  for_each_representative(system, depth, [&](const Word&, const Vec& p) {
    for (int i = 0; i < system.map_count(); ++i) {
      const Mat j = system.map(i).jacobian(p);
      const double defect = op_norm(j) / min_singular(j) - 1.0;
      report.max_defect = std::max(report.max_defect, defect);
    }
  });
  report.ok = report.max_defect <= tol;
  return report;
}

namespace {

Box exact_image_box(const Similarity& sim, const Box& box) {
  const auto corners = box.corners();
  Box img{sim.eval(corners.front()), sim.eval(corners.front())};
  for (const auto& c : corners) img.absorb(sim.eval(c));
  return img;
}

bool boxes_overlap_interior(const Box& a, const Box& b) {
  for (int k = 0; k < a.dim(); ++k) {
    if (std::min(a.hi[k], b.hi[k]) - std::max(a.lo[k], b.lo[k]) <= 1e-12) {
      return false;
    }
  }
  return true;
}

}  // namespace

OscReport validate_osc(const IFSystem& system, int grid_resolution) {
  if (grid_resolution < 2) throw PreconditionError("grid_resolution >= 2");
  OscReport report;

  bool boxes = true;
  for (const auto& m : system.maps()) {
    const auto* sim = dynamic_cast<const Similarity*>(m.get());
    if (!sim || !sim->axis_aligned()) {
      boxes = false;
      break;
    }
  }

  if (boxes) {
    report.certified = true;
    std::vector<Box> images;
    for (const auto& m : system.maps()) {
      images.push_back(exact_image_box(
          *dynamic_cast<const Similarity*>(m.get()), system.seed()));
    }
    for (std::size_t i = 0; i < images.size(); ++i) {
      for (std::size_t j = i + 1; j < images.size(); ++j) {
        if (boxes_overlap_interior(images[i], images[j])) {
          report.overlap_pairs.emplace_back(int(i), int(j));
        }
      }
    }
  } else {
    report.certified = false;
    // dense interior grid of X, mapped forward; membership in phi_j(int X)
    // via the inverse map
    const Box& x = system.seed();
    std::vector<Vec> grid;
    std::vector<int> idx(std::size_t(system.dim()), 0);
    const std::size_t total = [&] {
      std::size_t t = 1;
      for (int k = 0; k < system.dim(); ++k) t *= std::size_t(grid_resolution);
      return t;
    }();
    for (std::size_t n = 0; n < total; ++n) {
      Vec p(system.dim());
      std::size_t rem = n;
      for (int k = 0; k < system.dim(); ++k) {
        const int c = int(rem % std::size_t(grid_resolution));
        rem /= std::size_t(grid_resolution);
        p[k] = x.lo[k] +
               (x.hi[k] - x.lo[k]) * (c + 0.5) / double(grid_resolution);
      }
      grid.push_back(std::move(p));
    }
    for (int i = 0; i < system.map_count(); ++i) {
      for (int j = 0; j < system.map_count(); ++j) {
        if (i == j) continue;
        bool overlap = false;
        for (const auto& p : grid) {
          const Vec y = system.map(i).eval(p);
          const Vec back = system.map(j).inverse(y);
          if (x.interior_contains(back, 1e-9)) {
            overlap = true;
            break;
          }
        }
        if (overlap && i < j) report.overlap_pairs.emplace_back(i, j);
      }
    }
  }
  report.ok = report.overlap_pairs.empty();
  return report;
}

BoundaryDensityReport validate_boundary_density(const IFSystem& system,
                                                int radius_count,
                                                int sample_count,
                                                std::uint64_t seed) {
  Rng rng(seed);
  const Box& x = system.seed();
  const int d = system.dim();
  BoundaryDensityReport report;

  std::vector<Vec> boundary_points;
  // corners realize the worst ratio for a box; always include them
  for (auto& c : x.corners()) boundary_points.push_back(c);
  for (int k = 0; k < sample_count; ++k) {
    Vec p = rng.point_in_box(x);
    const int face_dim = rng.uniform_int(0, d - 1);
    p[face_dim] = rng.uniform_int(0, 1) ? x.hi[face_dim] : x.lo[face_dim];
    boundary_points.push_back(std::move(p));
  }

  const int mc = 2000;
  for (const auto& p : boundary_points) {
    for (int rk = 0; rk < radius_count; ++rk) {
      const double r =
          system.rho0() * std::pow(0.5, rng.uniform(0.0, 6.0));
      double ratio;
      if (d == 1) {
        const double inside = std::min(p[0] + r, x.hi[0]) -
                              std::max(p[0] - r, x.lo[0]);
        ratio = inside / (2.0 * r);
      } else {
        int hits = 0;
        for (int s = 0; s < mc; ++s) {
          if (x.interior_contains(rng.point_in_ball(p, r))) ++hits;
        }
        ratio = double(hits) / double(mc);
      }
      report.min_ratio = std::min(report.min_ratio, ratio);
    }
  }
  const double mc_slack = 0.2;
  report.ok = report.min_ratio > 0.0 &&
              report.min_ratio >= std::pow(2.0, -d) * (1.0 - mc_slack);
  return report;
}

// ---- distortion ----------------------------------------------------------

DistortionConstants distortion_constants(const IFSystem& system, int depth,
                                         int sample_count, std::uint64_t seed) {
  if (depth < 1) throw PreconditionError("depth must be >= 1");
  Rng rng(seed);
  DistortionConstants constants;
  constants.depth = depth;
  constants.sample_count = sample_count;

  const Alphabet alphabet = system.alphabet();
  std::vector<Word> words;
  std::uint64_t total = 0;
  bool enumerate = true;
  {
    std::uint64_t n = 1;
    for (int k = 1; k <= depth && enumerate; ++k) {
      n *= std::uint64_t(alphabet.size);
      total += n;
      if (total > 4000) enumerate = false;
    }
  }
  if (enumerate) {
    for (int k = 1; k <= depth; ++k) {
      for (auto& w : cylinders_at_depth(alphabet, k)) words.push_back(std::move(w));
    }
  } else {
    for (int k = 0; k < 4000; ++k) {
      words.push_back(random_word(alphabet, rng.uniform_int(1, depth), rng));
    }
  }

  const Box om = system.omega();
  const int point_count = std::clamp(sample_count, 4, 16);
  std::vector<Vec> omega_points;
  omega_points.push_back(om.barycenter());
  for (int k = 1; k < point_count; ++k) omega_points.push_back(rng.point_in_box(om));

  std::vector<Vec> seed_samples = system.seed().corners();
  seed_samples.push_back(system.seed().barycenter());
  for (int k = 0; k < 8; ++k) seed_samples.push_back(rng.point_in_box(system.seed()));

  const bool similarity = system.all_similarities();
  constants.d_hat = 0.0;

  std::vector<Mat> jacobians(omega_points.size());
  for (const auto& word : words) {
    double word_sup = 0.0;
    for (std::size_t k = 0; k < omega_points.size(); ++k) {
      jacobians[k] = compose(system, word, omega_points[k]).jacobian;
      word_sup = std::max(word_sup, op_norm(jacobians[k]));
    }
    for (std::size_t a = 0; a < omega_points.size(); ++a) {
      const double na = op_norm(jacobians[a]);
      const double ma = min_singular(jacobians[a]);
      for (std::size_t b = a + 1; b < omega_points.size(); ++b) {
        const double nb = op_norm(jacobians[b]);
        const double mb = min_singular(jacobians[b]);
        const double dist = (omega_points[a] - omega_points[b]).norm();
        const double variation = op_norm(jacobians[a] - jacobians[b]);
        constants.c_hat =
            std::max(constants.c_hat, variation / (na * dist));
        constants.k0_hat = std::max({constants.k0_hat, na / mb, nb / ma});
      }
    }
    // diameter of phi_word(X) from sampled image points
    double diam = 0.0;
    std::vector<Vec> images;
    images.reserve(seed_samples.size());
    for (const auto& p : seed_samples) {
      images.push_back(compose(system, word, p).value);
    }
    for (std::size_t a = 0; a < images.size(); ++a) {
      for (std::size_t b = a + 1; b < images.size(); ++b) {
        diam = std::max(diam, (images[a] - images[b]).norm());
      }
    }
    constants.d_hat = std::max(constants.d_hat, diam / word_sup);
  }
  if (similarity) {
    constants.c_hat = 0.0;
    constants.k0_hat = 1.0;
    // diam(phi_w(X)) = |phi_w'| diam(X) exactly for similarities.
    constants.d_hat = system.seed().diameter();
  } else {
    constants.d_hat *= 1.05;  // sampled diameters undershoot
    constants.d_hat = std::max(constants.d_hat, 1.0);
  }
  return constants;
}

BallInclusionReport check_ball_inclusions(const IFSystem& system,
                                          const DistortionConstants& constants,
                                          int trial_count, std::uint64_t seed) {
  Rng rng(seed);
  BallInclusionReport report;
  report.trials = trial_count;
  const Alphabet alphabet = system.alphabet();
  const double k0 = constants.k0_hat * 1.05;
  const double dist_limit = system.dist_limit_to_omega_boundary();

  // representative depth: deep enough that the anchor is close to E
  double smax = 0.0;
  for (int i = 0; i < system.map_count(); ++i) {
    smax = std::max(smax, system.sup_norm(i));
  }
  const int rep_depth =
      std::clamp(int(std::ceil(std::log(1e-3) / std::log(smax))), 5, 12);

  const int boundary_samples = system.dim() == 1 ? 2 : 12;
  for (int trial = 0; trial < trial_count; ++trial) {
    const Word word = random_word(alphabet, rng.uniform_int(1, 4), rng);
    const Vec x = project(system, random_word(alphabet, rep_depth, rng)).point;
    const double r = rng.uniform(0.05 * dist_limit, dist_limit);

    const auto at_x = compose(system, word, x);
    const double deriv = op_norm(at_x.jacobian);
    const double inner_radius = deriv * r / k0;
    double sup = 1.0;
    for (int k = 0; k < word.length(); ++k) sup *= system.sup_norm(word[k]);
    const double outer_radius = sup * r;

    double min_boundary_dist = std::numeric_limits<double>::infinity();
    for (int s = 0; s < boundary_samples; ++s) {
      Vec dir;
      if (system.dim() == 1) {
        dir = Vec::Constant(1, s == 0 ? 1.0 : -1.0);
      } else {
        dir = rng.unit_vector(system.dim());
      }
      const Vec u = x + r * dir;
      const Vec image = compose(system, word, u).value;
      min_boundary_dist =
          std::min(min_boundary_dist, (image - at_x.value).norm());
    }
    if (min_boundary_dist < inner_radius * (1.0 - 1e-9)) {
      report.violations.push_back(
          {word, x, r, 1, inner_radius - min_boundary_dist});
    }

    for (int s = 0; s < 4; ++s) {
      const Vec u = rng.point_in_ball(x, r);
      const Vec image = compose(system, word, u).value;
      const double dist = (image - at_x.value).norm();
      if (dist > outer_radius * (1.0 + 1e-9)) {
        report.violations.push_back({word, x, r, 2, dist - outer_radius});
      }
    }
  }
  return report;
}

// ---- conjugated builder ----------------------------------------------------

HOletusCheck measure_h_oletus(const IFSystem& base, double c2, double s_low,
                              double s_up, int grid_resolution) {
  if (base.dim() != 3) {
    throw PreconditionError("conjugated builder expects a base system on R^3");
  }
  if (grid_resolution < 2) throw PreconditionError("grid_resolution >= 2");
  if (s_up * s_up >= s_low) {
    throw PreconditionError("builder needs s_up^2 < s_low");
  }
  if (c2 <= 1.0) throw PreconditionError("plateau c2 must exceed 1");

  double max_forward = 0.0;   // max_i sup |phi_i'|
  double max_backward = 0.0;  // max_i sup |(phi_i^{-1})'|
  for (int i = 0; i < base.map_count(); ++i) {
    max_forward = std::max(max_forward, base.sup_norm(i));
    max_backward = std::max(max_backward, 1.0 / base.inf_norm(i));
  }

  HOletusCheck check;
  check.bound = std::min(s_up / max_forward, 1.0 / (s_low * max_backward));

  const RadialDeformation h{Deformation(c2)};
  const Box domain = base.omega_prime();
  double sup_h = 0.0;
  double sup_h_inverse = 0.0;
  auto visit = [&](const Vec& p) {
    const Mat j = h.jacobian(p);
    sup_h = std::max(sup_h, op_norm(j));
    sup_h_inverse = std::max(sup_h_inverse, 1.0 / min_singular(j));
  };
  const int n = grid_resolution;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        Vec p(3);
        p[0] = domain.lo[0] + (domain.hi[0] - domain.lo[0]) * a / (n - 1.0);
        p[1] = domain.lo[1] + (domain.hi[1] - domain.lo[1]) * b / (n - 1.0);
        p[2] = domain.lo[2] + (domain.hi[2] - domain.lo[2]) * c / (n - 1.0);
        visit(p);
      }
      // transition-band midplane, where g' peaks
      Vec p(3);
      p[0] = domain.lo[0] + (domain.hi[0] - domain.lo[0]) * a / (n - 1.0);
      p[1] = domain.lo[1] + (domain.hi[1] - domain.lo[1]) * b / (n - 1.0);
      p[2] = 0.5;
      visit(p);
    }
  }
  check.norm_product = sup_h * 1.01 * sup_h_inverse * 1.01;
  check.norm_product = std::max(check.norm_product, 1.0);
  check.accepted = check.norm_product <= check.bound;
  return check;
}

ConjugationResult build_conjugated(const IFSystem& base, double c2,
                                   double s_low, double s_up,
                                   int grid_resolution) {
  HOletusCheck check = measure_h_oletus(base, c2, s_low, s_up, grid_resolution);
  if (!check.accepted) {
    throw ConstructionRejectedError(
        "deformation rejected: norm product " +
            std::to_string(check.norm_product) + " exceeds bound " +
            std::to_string(check.bound),
        check.norm_product, check.bound);
  }

  const RadialDeformation h{Deformation(c2)};
  std::vector<MapPtr> maps;
  maps.reserve(base.maps().size());
  for (const auto& m : base.maps()) {
    maps.push_back(std::make_shared<ConjugatedMap>(m, h));
  }

  // deformed seed box: smallest box containing h(X) grown to forward
  // invariance under the conjugated maps
  Rng rng(0x5deece66dULL);
  Box box{h.eval(base.seed().corners().front()),
          h.eval(base.seed().corners().front())};
  for (const auto& c : base.seed().corners()) box.absorb(h.eval(c));
  for (int k = 0; k < 200; ++k) {
    box.absorb(h.eval(rng.point_in_box(base.seed())));
  }
  for (int iter = 0; iter < 200; ++iter) {
    Box grown = box;
    std::vector<Vec> samples = box.corners();
    samples.push_back(box.barycenter());
    for (int k = 0; k < 64; ++k) samples.push_back(rng.point_in_box(box));
    for (const auto& m : maps) {
      for (const auto& p : samples) grown.absorb(m->eval(p));
    }
    const double growth = std::max((box.lo - grown.lo).cwiseAbs().maxCoeff(),
                                   (grown.hi - box.hi).cwiseAbs().maxCoeff());
    box = grown;
    if (growth < 1e-13) break;
  }

  IFSystem system(base.dim(), std::move(maps), box, base.omega_margin(), s_low,
                  s_up);
  return {std::move(system), check};
}

}  // namespace rigidlim
