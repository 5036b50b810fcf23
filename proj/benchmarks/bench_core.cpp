#include <benchmark/benchmark.h>

#include "g2cal/fhn.hpp"
#include "g2cal/linear.hpp"
#include "g2cal/moments.hpp"
#include "g2cal/tracer.hpp"
#include "g2cal/trisymplectic.hpp"

using namespace g2cal;

namespace {

const fhn::Solution& bsSolution() {
  static const fhn::Solution sol =
      fhn::integrateFromSingularOrbit(fhn::bsParams(1.0), {}, fhn::bsArcLength(5.0, 1.0), 1e-10);
  return sol;
}

void BM_MetricFromPhi(benchmark::State& state) {
  const AlternatingForm phi = standardPhi0();
  for (auto _ : state) benchmark::DoNotOptimize(metricFromPhi(phi));
}
BENCHMARK(BM_MetricFromPhi);

void BM_HodgeStar(benchmark::State& state) {
  const AlternatingForm phi = standardPhi0();
  const Metric7 metric = metricFromPhi(phi);
  for (auto _ : state)
    benchmark::DoNotOptimize(hodgeStar(phi, metric.g, metric.volume_scale));
}
BENCHMARK(BM_HodgeStar);

void BM_IntegrateBs(benchmark::State& state) {
  const double t_end = fhn::bsArcLength(5.0, 1.0);
  for (auto _ : state) {
    auto sol = fhn::integrateFromSingularOrbit(fhn::bsParams(1.0), {}, t_end, 1e-10);
    benchmark::DoNotOptimize(sol);
  }
}
BENCHMARK(BM_IntegrateBs);

void BM_AssembleStarPhi(benchmark::State& state) {
  const auto& sol = bsSolution();
  const double t = 0.5 * (sol.tBegin() + sol.tEnd());
  for (auto _ : state) benchmark::DoNotOptimize(fhn::assembleStarPhi(sol, t));
}
BENCHMARK(BM_AssembleStarPhi);

void BM_TraceAssociative(benchmark::State& state) {
  const auto& sol = bsSolution();
  const double step = 1e-3 * (sol.tEnd() - sol.tBegin());
  for (auto _ : state) benchmark::DoNotOptimize(tracer::traceAssociative(sol, 4.0, step));
}
BENCHMARK(BM_TraceAssociative);

void BM_MomentValues(benchmark::State& state) {
  const auto& sol = bsSolution();
  const Quaternion p{0.5, 0.5, 0.5, 0.5}, q{1, 0, 0, 0};
  const auto pair = moments::hopfPair(p, q);
  const double t = 0.5 * (sol.tBegin() + sol.tEnd());
  for (auto _ : state) benchmark::DoNotOptimize(moments::momentValues(pair, sol, t));
}
BENCHMARK(BM_MomentValues);

void BM_TauFlowEguchiHanson(benchmark::State& state) {
  const auto T = trisym::TMatrixPath::identity();
  const Eigen::Vector3d k{1.0, -0.5, -0.5};
  Eigen::Matrix3d tau0 = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) tau0(i, i) = std::sqrt(2.0 + k(i));
  for (auto _ : state)
    benchmark::DoNotOptimize(trisym::integrateTau(T, tau0, 1.0, 10.0, 1e-10));
}
BENCHMARK(BM_TauFlowEguchiHanson);

}  // namespace

BENCHMARK_MAIN();
