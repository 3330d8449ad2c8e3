#include <benchmark/benchmark.h>

#include <cmath>

#include "rigidlim/measure.hpp"
#include "rigidlim/tangency.hpp"

using namespace rigidlim;

namespace {

IFSystem make_koch() {
  const double s3 = std::sqrt(3.0);
  const double a = M_PI / 3.0;
  auto sim = [](double angle, double tx, double ty) {
    Mat o(2, 2);
    o << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    Vec t(2);
    t << tx, ty;
    return std::make_shared<Similarity>(1.0 / 3, o, t);
  };
  Vec lo(2), hi(2);
  lo << 0, 0;
  hi << 1, s3 / 5;
  return IFSystem(2,
                  {sim(0, 0, 0), sim(a, 1.0 / 3, 0), sim(-a, 0.5, s3 / 6),
                   sim(0, 2.0 / 3, 0)},
                  Box{lo, hi}, 0.3, 0.3, 0.35);
}

void BM_PressureTable(benchmark::State& state) {
  IFSystem koch = make_koch();
  const int depth = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_pressure_table(koch, depth));
  }
}
BENCHMARK(BM_PressureTable)->Arg(4)->Arg(6);

void BM_DimensionBisection(benchmark::State& state) {
  IFSystem koch = make_koch();
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_dimension(koch, 5, 1e-12));
  }
}
BENCHMARK(BM_DimensionBisection);

void BM_SubspaceMetric(benchmark::State& state) {
  Rng rng(1);
  const int d = static_cast<int>(state.range(0));
  Subspace v = Subspace::random(d, d / 2, rng);
  Subspace w = Subspace::random(d, d / 2, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metric(v, w));
  }
}
BENCHMARK(BM_SubspaceMetric)->Arg(3)->Arg(8);

void BM_ConeMembership(benchmark::State& state) {
  Rng rng(2);
  Subspace v = Subspace::random(3, 2, rng);
  Cone cone(Vec::Zero(3), v, 0.25);
  Vec x = rng.gaussian(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cone_contains(cone, x));
  }
}
BENCHMARK(BM_ConeMembership);

void BM_WeakTangentScan(benchmark::State& state) {
  IFSystem koch = make_koch();
  const double t = estimate_dimension(koch, 5, 1e-12).midpoint();
  CylinderWeights weights = conformal_weights(koch, t, 5);
  auto radii = default_radius_grid(weights, koch.rho0(), 4);
  Rng rng(3);
  Subspace plane = Subspace::random(2, 1, rng);
  const Vec apex = weights.points.front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        weak_tangent_ratios(weights, apex, plane, 0.25, t, radii));
  }
}
BENCHMARK(BM_WeakTangentScan);

}  // namespace

BENCHMARK_MAIN();
