#pragma once

// In-process builders for the bundled reference systems, so library
// tests do not depend on the config loader.

#include <cmath>
#include <memory>
#include <vector>

#include "rigidlim/ifs.hpp"

namespace rigidlim::testing {

inline MapPtr sim1(double scale, double shift) {
  Mat o(1, 1);
  o << 1.0;
  Vec t(1);
  t << shift;
  return std::make_shared<Similarity>(scale, o, t);
}

inline MapPtr sim2(double scale, double angle, double tx, double ty) {
  Mat o(2, 2);
  o << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  Vec t(2);
  t << tx, ty;
  return std::make_shared<Similarity>(scale, o, t);
}

inline Box box1(double lo, double hi) {
  Vec a(1), b(1);
  a << lo;
  b << hi;
  return Box{a, b};
}

inline Box box2(double x0, double y0, double x1, double y1) {
  Vec a(2), b(2);
  a << x0, y0;
  b << x1, y1;
  return Box{a, b};
}

inline IFSystem make_cantor() {
  return IFSystem(1, {sim1(1.0 / 3, 0.0), sim1(1.0 / 3, 2.0 / 3)},
                  box1(0, 1), 0.25, 0.3, 0.35);
}

inline IFSystem make_two_ratio() {
  return IFSystem(1, {sim1(0.5, 0.0), sim1(0.25, 0.75)}, box1(0, 1), 0.25,
                  0.25, 0.5);
}

inline IFSystem make_line_cantor() {
  return IFSystem(2, {sim2(1.0 / 3, 0, 0, 0), sim2(1.0 / 3, 0, 2.0 / 3, 0)},
                  box2(0, -0.5, 1, 0.5), 0.3, 0.3, 0.35);
}

inline IFSystem make_koch() {
  const double s3 = std::sqrt(3.0);
  const double a60 = M_PI / 3.0;
  return IFSystem(2,
                  {sim2(1.0 / 3, 0, 0, 0), sim2(1.0 / 3, a60, 1.0 / 3, 0),
                   sim2(1.0 / 3, -a60, 0.5, s3 / 6),
                   sim2(1.0 / 3, 0, 2.0 / 3, 0)},
                  box2(0, 0, 1, s3 / 5), 0.3, 0.3, 0.35);
}

inline IFSystem make_sierpinski() {
  return IFSystem(2,
                  {sim2(0.5, 0, 0, 0), sim2(0.5, 0, 0.5, 0),
                   sim2(0.5, 0, 0.25, 0.5)},
                  box2(0, 0, 1, 1), 0.3, 0.45, 0.55);
}

inline IFSystem make_dust() {
  Mat o = Mat::Identity(3, 3);
  std::vector<MapPtr> maps;
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) {
        Vec t(3);
        t << x * 2.0 / 3, y * 2.0 / 3, z * 2.0 / 3;
        maps.push_back(std::make_shared<Similarity>(1.0 / 3, o, t));
      }
  Vec lo = Vec::Zero(3), hi = Vec::Ones(3);
  return IFSystem(3, maps, Box{lo, hi}, 0.25, 0.3, 0.5);
}

}  // namespace rigidlim::testing
