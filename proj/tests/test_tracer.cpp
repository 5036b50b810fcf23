#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "g2cal/tracer.hpp"

using namespace g2cal;
using namespace g2cal::tracer;

namespace {

const fhn::Solution& bsSolution() {
  static const fhn::Solution sol = fhn::integrateFromSingularOrbit(
      fhn::bsParams(1.0), {}, fhn::bsArcLength(4.0, 1.0), 1e-11);
  return sol;
}

double bsMuRadial(double r, double c) { return 3.0 * r * r * std::cbrt(c + r * r); }

double stepFor(const fhn::Solution& sol) { return 1e-3 * (sol.tEnd() - sol.tBegin()); }

}  // namespace

TEST_CASE("associative trace satisfies the Bryant-Salamon level equation") {
  const auto& sol = bsSolution();
  const double level = 4.0;
  const auto curves = traceAssociative(sol, level, stepFor(sol));
  REQUIRE(curves.size() == 1);  // connected through the apex
  const auto& curve = curves[0];
  CHECK(curve.points.size() > 100);
  for (const auto& pt : curve.points) {
    const fhn::State s = sol.at(pt.t);
    CHECK(std::abs(4.0 * s.x1 * std::sin(pt.theta) - level) <= 1e-9 * (1.0 + level));
    // same equation through the closed-form radial factor
    const double r = std::sqrt(2.0 * s.a / std::sqrt(3.0));
    CHECK(std::abs(bsMuRadial(r, 1.0) * std::sin(pt.theta) - level) <=
          1e-7 * (1.0 + level));
  }
  CHECK(curve.endpoints[0] == EndpointTag::kDomainEnd);
  CHECK(curve.endpoints[1] == EndpointTag::kDomainEnd);
  CHECK(classifyAssociative(curve, sol.params()) == "T2xR");
}

TEST_CASE("high level curves hug theta -> 0 at the domain end") {
  const auto& sol = bsSolution();
  const double level = 10.0;
  const auto curves = traceAssociative(sol, level, stepFor(sol));
  REQUIRE(curves.size() == 1);
  const auto& pts = curves[0].points;
  const fhn::State end_state = sol.at(sol.tEnd());
  const double theta_expected = std::asin(level / (4.0 * end_state.x1));
  const double theta_end = std::min(pts.front().theta, pts.back().theta);
  CHECK(theta_end == doctest::Approx(theta_expected).epsilon(1e-3));
  CHECK(theta_end < 0.55);  // well below the apex

  CHECK_THROWS_AS(traceAssociative(sol, 1e9, stepFor(sol)), EmptyLevelError);
}

TEST_CASE("level zero returns the boundary strata") {
  const auto& sol = bsSolution();
  const auto curves = traceAssociative(sol, 0.0, stepFor(sol));
  REQUIRE(curves.size() == 2);
  CHECK(curves[0].points.front().theta == 0.0);
  CHECK(curves[1].points.front().theta == doctest::Approx(std::numbers::pi));
  for (const auto& curve : curves) {
    CHECK(classifyAssociative(curve, sol.params()) == "S1xR2");
  }
}

TEST_CASE("zero-section associatives per diagram") {
  const auto& bs = bsSolution();
  const auto orbit = singularOrbitAssociatives(bs);
  REQUIRE(orbit.size() == 1);
  CHECK(classifyAssociative(orbit[0], bs.params()) == "S3");

  fhn::Params kmn;
  kmn.diagram = fhn::Diagram::kKmn;
  kmn.m = 2;
  kmn.n = 1;
  kmn.c1 = -4.0;
  kmn.c2 = 1.0;
  const fhn::Solution sol = fhn::integrateFromSingularOrbit(kmn, {}, 0.8, 1e-10);
  const auto lens = singularOrbitAssociatives(sol);
  REQUIRE(lens.size() == 2);
  CHECK(classifyAssociative(lens[0], kmn) == "L(2;-1,1)");
  CHECK(classifyAssociative(lens[1], kmn) == "L(1;2,-2)");
}

TEST_CASE("cone-exit curves are unclassifiable") {
  const fhn::Params p = fhn::bsParams(1.0);
  fhn::State start = fhn::bsClosedForm(1.0, 1.0);
  start.t = fhn::bsArcLength(1.0, 1.0);
  const fhn::Solution sol = fhn::integrate(p, start, -1.0, 1e-10);
  REQUIRE(sol.termination() == fhn::Termination::kConeExit);
  const auto curves = traceAssociative(sol, 0.0, stepFor(sol));
  CHECK_THROWS_AS(classifyAssociative(curves[0], p), UnclassifiableError);
}

TEST_CASE("coassociative traces in both conventions") {
  const auto& sol = bsSolution();

  SUBCASE("BS table value 2 sqrt3 r^2 cos(theta)") {
    const double level = 3.0;
    const auto curve = traceCoassociative(sol, level, stepFor(sol), NuConvention::kBsCase0);
    CHECK(curve.points.size() > 50);
    for (const auto& pt : curve.points) {
      const fhn::State s = sol.at(pt.t);
      const double r2 = 2.0 * s.a / std::sqrt(3.0);
      CHECK(std::abs(2.0 * std::sqrt(3.0) * r2 * std::cos(pt.theta) - level) <=
            1e-9 * (1.0 + level));
    }
  }

  SUBCASE("FHN quotient value -4 (b - c1) cos(theta)") {
    const double level = -3.0;
    const auto curve = traceCoassociative(sol, level, stepFor(sol), NuConvention::kFhn);
    for (const auto& pt : curve.points) {
      const fhn::State s = sol.at(pt.t);
      CHECK(std::abs(-4.0 * (s.b - sol.params().c1) * std::cos(pt.theta) - level) <=
            1e-9 * (1.0 + std::abs(level)));
    }
  }

  SUBCASE("nu = 0 is the vertical line theta = pi/2") {
    const auto curve = traceCoassociative(sol, 0.0, stepFor(sol));
    for (const auto& pt : curve.points)
      CHECK(pt.theta == doctest::Approx(std::numbers::pi / 2));
    CHECK(curve.points.front().t == doctest::Approx(sol.tBegin()));
    CHECK(curve.points.back().t == doctest::Approx(sol.tEnd()));
  }

  CHECK_THROWS_AS(traceCoassociative(sol, 1e9, stepFor(sol)), EmptyLevelError);
}

TEST_CASE("level-set constancy along traced curves") {
  const auto& sol = bsSolution();
  for (double level : {1.0, 5.0, 9.0}) {
    for (const auto& curve : traceAssociative(sol, level, stepFor(sol))) {
      for (const auto& pt : curve.points) {
        const fhn::State s = sol.at(pt.t);
        CHECK(std::abs(4.0 * s.x1 * std::sin(pt.theta) - level) <= 1e-8 * (1.0 + level));
      }
    }
  }
}

TEST_CASE("transversal monotonicity along traced curves") {
  const auto& sol = bsSolution();
  // nu restricted to an associative trace is strictly monotone (the level
  // families form an orthogonal parametrization, so the transversal function
  // has nonvanishing derivative along each curve)...
  const auto assoc = traceAssociative(sol, 4.0, stepFor(sol))[0];
  int direction = 0;
  for (std::size_t i = 1; i < assoc.points.size(); ++i) {
    auto nu = [&sol](const QuotientPoint& pt) {
      return -4.0 * (sol.at(pt.t).b - sol.params().c1) * std::cos(pt.theta);
    };
    const double diff = nu(assoc.points[i]) - nu(assoc.points[i - 1]);
    const int sgn = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
    REQUIRE(sgn != 0);
    if (direction == 0) direction = sgn;
    CHECK(sgn == direction);
  }
  // ...and |mu| is strictly increasing along a coassociative trace oriented
  // away from the boundary (the lift direction of the defining flow).
  const auto coassoc = traceCoassociative(sol, 2.0, stepFor(sol), NuConvention::kFhn);
  direction = 0;
  for (std::size_t i = 1; i < coassoc.points.size(); ++i) {
    auto mu_norm = [&sol](const QuotientPoint& pt) {
      return 4.0 * sol.at(pt.t).x1 * std::sin(pt.theta);
    };
    const double diff = mu_norm(coassoc.points[i]) - mu_norm(coassoc.points[i - 1]);
    const int sgn = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
    REQUIRE(sgn != 0);
    if (direction == 0) direction = sgn;
    CHECK(sgn == direction);
  }
}

TEST_CASE("distinct level sets never approach each other") {
  const auto& sol = bsSolution();
  const auto a = traceAssociative(sol, 3.0, stepFor(sol))[0];
  const auto b = traceAssociative(sol, 4.0, stepFor(sol))[0];
  const double t_scale = sol.tEnd() - sol.tBegin();
  double min_dist = 1e300;
  for (std::size_t i = 0; i < a.points.size(); i += 7) {
    for (std::size_t j = 0; j < b.points.size(); j += 7) {
      const double dth = a.points[i].theta - b.points[j].theta;
      const double dt = (a.points[i].t - b.points[j].t) / t_scale;
      min_dist = std::min(min_dist, std::hypot(dth, dt));
    }
  }
  CHECK(min_dist > 1e-3);
}

TEST_CASE("associative levels cover the quotient grid") {
  const auto& sol = bsSolution();
  const int n = 12;
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      const double theta = std::numbers::pi * i / n;
      const double t = sol.tBegin() + (sol.tEnd() - sol.tBegin()) * j / n;
      const double level = 4.0 * sol.at(t).x1 * std::sin(theta);
      if (level < 1e-3) continue;
      double min_dist = 1e300;
      for (const auto& curve : traceAssociative(sol, level, stepFor(sol)))
        for (const auto& pt : curve.points)
          min_dist = std::min(min_dist, std::hypot(pt.theta - theta, pt.t - t));
      CHECK(min_dist <= 0.05);
    }
  }
}

TEST_CASE("gradients of |mu| and nu are orthogonal on B") {
  const auto& sol = bsSolution();
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> theta_dist(0.3, std::numbers::pi - 0.3);
  std::uniform_real_distribution<double> t_dist(0.25 * sol.tEnd(), 0.9 * sol.tEnd());
  for (int trial = 0; trial < 50; ++trial) {
    const double residual =
        gradientOrthogonalityResidual(sol, theta_dist(rng), t_dist(rng));
    CHECK(residual <= 1e-6);
  }
}

TEST_CASE("coassociative fibre status against the explicit loci") {
  SUBCASE("Bryant-Salamon") {
    const double c = 1.0;
    const double bound = 3.0 * std::sqrt(3.0) / 4.0 * c;
    CHECK(bsCoassocFiberStatus({bound, 0, 0}, c) == FiberStatus::kSingularHLCone);
    CHECK(bsCoassocFiberStatus({-bound, 0, 0}, c) == FiberStatus::kSingularHLCone);
    CHECK(bsCoassocFiberStatus({0.1, 0, 0}, c) == FiberStatus::kSmoothT2xR2);
    CHECK(bsCoassocFiberStatus({bound + 0.4, -0.4, 2.0 * 0.4}, c) ==
          FiberStatus::kSmoothT2xR2);
    CHECK(bsCoassocFiberStatus({1.1, 0.3, -0.2}, c) == FiberStatus::kNotThroughSingularSet);
    CHECK(bsCoassocFiberStatus({bound + 1.0, 0, 0}, c) ==
          FiberStatus::kNotThroughSingularSet);
  }
  SUBCASE("Delta SU(2)") {
    fhn::Params p;
    p.diagram = fhn::Diagram::kDeltaSU2;
    p.c1 = 1.0;
    p.c2 = -1.0;
    CHECK(coassocFiberStatus({1.2, 0, 0}, p) == FiberStatus::kSmoothT2xR2);
    CHECK(coassocFiberStatus({2.0, 0, 0}, p) == FiberStatus::kSingularHLCone);
    CHECK(coassocFiberStatus({2.7, 0, 0}, p) == FiberStatus::kNotThroughSingularSet);
    CHECK(coassocFiberStatus({1.2, 0.5, 0}, p) == FiberStatus::kNotThroughSingularSet);
  }
  SUBCASE("{1} x SU(2)") {
    fhn::Params p;
    p.diagram = fhn::Diagram::kOneTimesSU2;
    p.c1 = -1.0;
    CHECK(coassocFiberStatus({0, 0, 3.0}, p) == FiberStatus::kSmoothT2xR2);
    CHECK(coassocFiberStatus({0, 0, -4.0}, p) == FiberStatus::kSingularHLCone);
    CHECK(coassocFiberStatus({0, 0, 5.0}, p) == FiberStatus::kNotThroughSingularSet);
  }
  SUBCASE("K_{m,n}") {
    fhn::Params p;
    p.diagram = fhn::Diagram::kKmn;
    p.m = p.n = 1;
    p.c1 = -1.0;
    p.c2 = 1.0;
    auto target = [&](double x, double y) {
      return Eigen::Vector3d{2.0 * x * y, -4.0 * y, -8.0 * x};
    };
    CHECK(coassocFiberStatus(target(0.3, -0.4), p) == FiberStatus::kSmoothT3xR);
    CHECK(coassocFiberStatus(target(1.0, -0.4), p) == FiberStatus::kSmoothT2xR2);
    CHECK(coassocFiberStatus(target(1.0, 1.0), p) == FiberStatus::kSingularHLCone);
    CHECK(coassocFiberStatus(target(-1.0, 1.0), p) == FiberStatus::kSingularHLCone);
    CHECK(coassocFiberStatus(target(1.4, 0.2), p) == FiberStatus::kNotThroughSingularSet);
    CHECK(coassocFiberStatus({1.0, 1.0, 1.0}, p) == FiberStatus::kNotThroughSingularSet);
  }
}

TEST_CASE("alpha fibration dichotomy") {
  const auto& from_origin = bsSolution();
  const auto global = alphaFibrationTest(from_origin);
  CHECK(global.status == FibrationStatus::kGlobalFibration);

  // restricted to r in [1, 2]: split with u_min = 4 adot bdot at r = 1
  const fhn::Params p = fhn::bsParams(1.0);
  fhn::State start = fhn::bsClosedForm(1.0, 1.0);
  start.t = fhn::bsArcLength(1.0, 1.0);
  const fhn::Solution restricted =
      fhn::integrate(p, start, fhn::bsArcLength(2.0, 1.0), 1e-11);
  const auto split = alphaFibrationTest(restricted);
  CHECK(split.status == FibrationStatus::kSplitRequired);
  const fhn::State at_one = fhn::bsClosedForm(1.0, 1.0);
  CHECK(split.u_min ==
        doctest::Approx(4.0 * at_one.adot() * at_one.bdot()).epsilon(1e-8));

  CHECK(alphaJacobianMin(from_origin, 50) > 1e-6);
}

TEST_CASE("level below inf u on a restricted domain splits into two branches") {
  const fhn::Params p = fhn::bsParams(1.0);
  fhn::State start = fhn::bsClosedForm(1.0, 1.0);
  start.t = fhn::bsArcLength(1.0, 1.0);
  const fhn::Solution sol = fhn::integrate(p, start, fhn::bsArcLength(2.0, 1.0), 1e-11);
  const double u_min = 4.0 * sol.at(sol.tBegin()).x1;
  const double level = 0.5 * u_min;
  const auto curves = traceAssociative(sol, level, stepFor(sol));
  REQUIRE(curves.size() == 2);
  // one branch below the apex, one above, never meeting pi/2
  CHECK(curves[0].points.front().theta < std::numbers::pi / 2);
  CHECK(curves[1].points.front().theta > std::numbers::pi / 2);
  for (const auto& curve : curves)
    for (const auto& pt : curve.points) {
      const fhn::State s = sol.at(pt.t);
      CHECK(std::abs(4.0 * s.x1 * std::sin(pt.theta) - level) <= 1e-9 * (1 + level));
    }
}

TEST_CASE("alpha hypothesis fails when b + c2 is negative") {
  // On the lower cone branch (b < c1 and b < -c2) the radial factors of
  // |mu| and nu move in opposite directions.
  fhn::Params p;
  p.c1 = 1.0;
  p.c2 = -1.0;
  fhn::State seed;
  seed.t = 0.0;
  seed.a = 1.0;
  seed.b = 0.5;
  seed.x1 = seed.x2 = 0.479;
  const fhn::Solution sol = fhn::integrate(p, seed, 0.2, 1e-10);
  CHECK_THROWS_AS(alphaFibrationTest(sol), HypothesisFailedError);
}

TEST_CASE("render emits both families with the singular fibres flagged") {
  const auto& sol = bsSolution();
  const std::string csv = "levelsets_test.csv", svg = "levelsets_test.svg";
  std::vector<double> mu_levels, nu_levels;
  for (int i = 1; i <= 8; ++i) {
    mu_levels.push_back(1.2 * i);
    nu_levels.push_back(-7.0 + 2.0 * i);  // includes nu = 1 family around 0...
  }
  nu_levels[3] = 0.0;  // the vertical line
  const auto result = renderLevelsets(sol, mu_levels, nu_levels, csv, svg,
                                      NuConvention::kBsCase0, 1.0);
  CHECK(result.curve_count >= 16);
  CHECK(result.singular_fibers.size() == 2);
  CHECK(result.singular_fibers[0](0) ==
        doctest::Approx(3.0 * std::sqrt(3.0) / 4.0).epsilon(1e-14));

  // re-read the CSV and check every emitted point satisfies its equation
  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "curve_id,kind,level,theta,t");
  bool has_vertical = false;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string id, kind;
    std::getline(row, id, ',');
    std::getline(row, kind, ',');
    double level, theta, t;
    char comma;
    row >> level >> comma >> theta >> comma >> t;
    const fhn::State s = sol.at(t);
    if (kind == "assoc") {
      CHECK(std::abs(4.0 * s.x1 * std::sin(theta) - level) <= 1e-9 * (1 + std::abs(level)));
    } else {
      CHECK(std::abs(4.0 * s.a * std::cos(theta) - level) <= 1e-9 * (1 + std::abs(level)));
      if (level == 0.0 && std::abs(theta - std::numbers::pi / 2) < 1e-9)
        has_vertical = true;
    }
    ++rows;
  }
  CHECK(rows > 500);
  CHECK(has_vertical);

  // empty level lists give a header-only CSV
  const auto empty = renderLevelsets(sol, {}, {}, csv, svg);
  CHECK(empty.curve_count == 0);
  std::ifstream empty_in(csv);
  std::getline(empty_in, line);
  CHECK(line == "curve_id,kind,level,theta,t");
  CHECK_FALSE(std::getline(empty_in, line));

  std::remove(csv.c_str());
  std::remove(svg.c_str());
}
