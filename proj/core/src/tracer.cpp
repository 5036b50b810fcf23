#include "g2cal/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "g2cal/moments.hpp"

namespace g2cal::tracer {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kThetaBoundaryTol = 1e-6;

struct LevelFunction {
  const fhn::Solution* solution;
  CurveKind kind;
  NuConvention convention;

  // radial factor and its t-derivative: F = radial(t) * angular(theta)
  double radial(double t) const {
    const fhn::State s = solution->at(t);
    if (kind == CurveKind::kAssociative) return 4.0 * s.x1;
    if (convention == NuConvention::kBsCase0) return 4.0 * s.a;
    return -4.0 * (s.b - solution->params().c1);
  }
  double radialDot(double t) const {
    const fhn::State s = solution->at(t);
    if (kind == CurveKind::kAssociative)
      return -fhn::lambdaA(s.a, s.b, solution->params()) /
             std::sqrt(fhn::minusLambda(s.a, s.b, solution->params()));
    if (convention == NuConvention::kBsCase0) return 4.0 * s.adot();
    return -4.0 * s.bdot();
  }
  double angular(double theta) const {
    return kind == CurveKind::kAssociative ? std::sin(theta) : std::cos(theta);
  }
  double angularDot(double theta) const {
    return kind == CurveKind::kAssociative ? std::cos(theta) : -std::sin(theta);
  }
  double value(double theta, double t) const { return radial(t) * angular(theta); }
};

EndpointTag tagFor(const fhn::Solution& solution, double theta, double t, double step) {
  if (theta <= kThetaBoundaryTol) return EndpointTag::kThetaZero;
  if (theta >= kPi - kThetaBoundaryTol) return EndpointTag::kThetaPi;
  if (solution.termination() == fhn::Termination::kConeExit &&
      std::abs(t - solution.coneExitTime()) <= step)
    return EndpointTag::kConeExit;
  if (t <= solution.tBegin() + step && solution.fromSingularOrbit())
    return EndpointTag::kSingularOrbit;
  return EndpointTag::kDomainEnd;
}

EndpointTag domainEndpointTag(const fhn::Solution& solution, bool at_begin) {
  const double t = at_begin ? solution.tBegin() : solution.tEnd();
  const double step = 1e-9 * (solution.tEnd() - solution.tBegin());
  return tagFor(solution, kPi / 2.0, t, step);
}

/// Predictor-corrector continuation of radial(t) * angular(theta) = level
/// from a seed, in the tangent direction `orientation`.
std::vector<QuotientPoint> continueCurve(const LevelFunction& f, double level,
                                         QuotientPoint seed, double step, int orientation,
                                         EndpointTag& tag) {
  const fhn::Solution& sol = *f.solution;
  std::vector<QuotientPoint> pts{seed};
  QuotientPoint x = seed;
  const double scale = 1.0 + std::abs(level);
  const int max_points = 100000;

  for (int iter = 0; iter < max_points; ++iter) {
    const double gt = f.radialDot(x.t) * f.angular(x.theta);
    const double gth = f.radial(x.t) * f.angularDot(x.theta);
    const double gnorm = std::hypot(gth, gt);
    // tangent = rotated gradient
    double tth = -gt / gnorm, tt = gth / gnorm;
    if (orientation < 0) {
      tth = -tth;
      tt = -tt;
    }
    QuotientPoint next{x.theta + step * tth, x.t + step * tt};
    next.t = std::clamp(next.t, sol.tBegin(), sol.tEnd());
    next.theta = std::clamp(next.theta, 0.0, kPi);

    // Newton corrector along the gradient direction
    for (int newton = 0; newton < 8; ++newton) {
      const double r = f.value(next.theta, next.t) - level;
      if (std::abs(r) <= 1e-13 * scale) break;
      const double cth = f.radial(next.t) * f.angularDot(next.theta);
      const double ct = f.radialDot(next.t) * f.angular(next.theta);
      const double n2 = cth * cth + ct * ct;
      next.theta -= r * cth / n2;
      next.t -= r * ct / n2;
      next.t = std::clamp(next.t, sol.tBegin(), sol.tEnd());
      next.theta = std::clamp(next.theta, 0.0, kPi);
    }
    if (std::abs(f.value(next.theta, next.t) - level) > 1e-9 * scale) {
      // correction failed (typically pinned at a domain corner): stop here
      tag = tagFor(sol, x.theta, x.t, step);
      return pts;
    }
    pts.push_back(next);

    const double t_span = sol.tEnd() - sol.tBegin();
    const bool at_theta0 = next.theta <= kThetaBoundaryTol;
    const bool at_thetapi = next.theta >= kPi - kThetaBoundaryTol;
    const bool at_tlo = next.t <= sol.tBegin() + 1e-12 * t_span;
    const bool at_thi = next.t >= sol.tEnd() - 1e-12 * t_span;
    if (at_theta0 || at_thetapi || at_tlo || at_thi) {
      tag = tagFor(sol, next.theta, next.t, step);
      return pts;
    }
    x = next;
  }
  tag = tagFor(sol, x.theta, x.t, step);
  return pts;
}

LevelSetCurve boundaryLine(const fhn::Solution& sol, double theta, double step) {
  LevelSetCurve curve;
  curve.kind = CurveKind::kAssociative;
  curve.level = 0.0;
  const int n = std::max(2, static_cast<int>((sol.tEnd() - sol.tBegin()) / step));
  for (int i = 0; i <= n; ++i)
    curve.points.push_back({theta, sol.tBegin() + (sol.tEnd() - sol.tBegin()) * i / n});
  curve.endpoints[0] = domainEndpointTag(sol, true);
  curve.endpoints[1] = domainEndpointTag(sol, false);
  return curve;
}

}  // namespace

std::vector<LevelSetCurve> traceAssociative(const fhn::Solution& solution, double level,
                                            double step) {
  if (level < 0.0) throw EmptyLevelError("traceAssociative: level must be nonnegative");
  if (level == 0.0)
    return {boundaryLine(solution, 0.0, step), boundaryLine(solution, kPi, step)};

  const LevelFunction f{&solution, CurveKind::kAssociative, NuConvention::kFhn};

  // Scan for the supremum of u and for the apex u(t) = level.
  const int n_scan = 2000;
  double u_max = 0.0, u_min = std::numeric_limits<double>::infinity();
  double apex_t = std::numeric_limits<double>::quiet_NaN();
  double prev_t = solution.tBegin(), prev_u = f.radial(prev_t);
  for (int i = 0; i <= n_scan; ++i) {
    const double t = solution.tBegin() + (solution.tEnd() - solution.tBegin()) * i / n_scan;
    const double u = f.radial(t);
    u_max = std::max(u_max, u);
    u_min = std::min(u_min, u);
    if (std::isnan(apex_t) && (prev_u - level) * (u - level) <= 0.0 && i > 0) {
      // bisect u(t) = level
      double lo = prev_t, hi = t;
      for (int b = 0; b < 80; ++b) {
        const double mid = 0.5 * (lo + hi);
        ((f.radial(mid) - level) * (f.radial(lo) - level) <= 0.0 ? hi : lo) = mid;
      }
      apex_t = 0.5 * (lo + hi);
    }
    prev_t = t;
    prev_u = u;
  }
  if (u_max < level) throw EmptyLevelError("traceAssociative: level exceeds sup 4 adot bdot");

  std::vector<LevelSetCurve> curves;
  if (!std::isnan(apex_t)) {
    // one connected curve through the apex (theta = pi/2)
    LevelSetCurve curve;
    curve.kind = CurveKind::kAssociative;
    curve.level = level;
    EndpointTag tag_fwd, tag_bwd;
    auto fwd = continueCurve(f, level, {kPi / 2.0, apex_t}, step, +1, tag_fwd);
    auto bwd = continueCurve(f, level, {kPi / 2.0, apex_t}, step, -1, tag_bwd);
    std::reverse(bwd.begin(), bwd.end());
    bwd.pop_back();
    curve.points = std::move(bwd);
    curve.points.insert(curve.points.end(), fwd.begin(), fwd.end());
    curve.endpoints = {tag_bwd, tag_fwd};
    curves.push_back(std::move(curve));
  } else {
    // u > level on the whole domain: two graph branches
    for (int branch = 0; branch < 2; ++branch) {
      const double th0 = std::asin(std::min(1.0, level / f.radial(solution.tBegin())));
      const double theta = branch == 0 ? th0 : kPi - th0;
      LevelSetCurve curve;
      curve.kind = CurveKind::kAssociative;
      curve.level = level;
      EndpointTag tag_end;
      // orient the tangent toward increasing t
      const double gt = f.radialDot(solution.tBegin()) * f.angular(theta);
      const double gth = f.radial(solution.tBegin()) * f.angularDot(theta);
      const int orient = (gth >= 0.0) ? +1 : -1;
      (void)gt;
      curve.points = continueCurve(f, level, {theta, solution.tBegin()}, step, orient, tag_end);
      curve.endpoints = {solution.fromSingularOrbit() ? EndpointTag::kSingularOrbit
                                                      : EndpointTag::kDomainEnd,
                         tag_end};
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

LevelSetCurve traceCoassociative(const fhn::Solution& solution, double nu_level, double step,
                                 NuConvention convention) {
  const LevelFunction f{&solution, CurveKind::kCoassociative, convention};

  LevelSetCurve curve;
  curve.kind = CurveKind::kCoassociative;
  curve.level = nu_level;

  if (nu_level == 0.0) {
    // cos(theta) = 0: the vertical line theta = pi/2
    const int n = std::max(2, static_cast<int>((solution.tEnd() - solution.tBegin()) / step));
    for (int i = 0; i <= n; ++i)
      curve.points.push_back(
          {kPi / 2.0, solution.tBegin() + (solution.tEnd() - solution.tBegin()) * i / n});
    curve.endpoints[0] = domainEndpointTag(solution, true);
    curve.endpoints[1] = domainEndpointTag(solution, false);
    return curve;
  }

  // seed where |level / v(t)| <= 1
  const int n_scan = 2000;
  double seed_t = std::numeric_limits<double>::quiet_NaN();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n_scan; ++i) {
    const double t = solution.tBegin() + (solution.tEnd() - solution.tBegin()) * i / n_scan;
    const double ratio = nu_level / f.radial(t);
    if (std::abs(ratio) <= 1.0 && std::abs(ratio) < best) {
      best = std::abs(ratio);
      seed_t = t;
    }
  }
  if (std::isnan(seed_t)) throw EmptyLevelError("traceCoassociative: level exceeds sup |nu|");
  const double theta0 = std::acos(nu_level / f.radial(seed_t));

  EndpointTag tag_fwd, tag_bwd;
  auto fwd = continueCurve(f, nu_level, {theta0, seed_t}, step, +1, tag_fwd);
  auto bwd = continueCurve(f, nu_level, {theta0, seed_t}, step, -1, tag_bwd);
  std::reverse(bwd.begin(), bwd.end());
  bwd.pop_back();
  curve.points = std::move(bwd);
  curve.points.insert(curve.points.end(), fwd.begin(), fwd.end());
  curve.endpoints = {tag_bwd, tag_fwd};
  return curve;
}

std::vector<LevelSetCurve> singularOrbitAssociatives(const fhn::Solution& solution) {
  if (!solution.fromSingularOrbit())
    throw UnknownCaseError("singularOrbitAssociatives: solution does not reach the singular orbit");
  std::vector<LevelSetCurve> out;
  LevelSetCurve orbit;
  orbit.kind = CurveKind::kAssociative;
  orbit.level = 0.0;
  orbit.in_singular_orbit = true;
  orbit.points = {{kPi / 2.0, solution.tBegin()}};
  orbit.endpoints = {EndpointTag::kSingularOrbit, EndpointTag::kSingularOrbit};
  out.push_back(orbit);
  if (solution.params().diagram == fhn::Diagram::kKmn) {
    LevelSetCurve s2 = orbit;
    s2.s2_component = true;
    out.push_back(s2);
  }
  return out;
}

std::string classifyAssociative(const LevelSetCurve& curve, const fhn::Params& params) {
  const auto has = [&curve](EndpointTag tag) {
    return curve.endpoints[0] == tag || curve.endpoints[1] == tag;
  };
  if (has(EndpointTag::kConeExit)) throw UnclassifiableError("unknown/incomplete");

  if (curve.in_singular_orbit) {
    switch (params.diagram) {
      case fhn::Diagram::kDeltaSU2:
      case fhn::Diagram::kOneTimesSU2:
        return "S3";
      case fhn::Diagram::kKmn: {
        std::ostringstream label;
        if (curve.s2_component)
          label << "L(" << params.n << ";" << params.m << "," << -params.m << ")";
        else
          label << "L(" << params.m << ";" << -params.n << "," << params.n << ")";
        return label.str();
      }
      default:
        throw UnclassifiableError("unknown/incomplete");
    }
  }

  const bool boundary_line = has(EndpointTag::kThetaZero) || has(EndpointTag::kThetaPi) ||
                             (curve.level == 0.0);
  if (boundary_line && curve.level == 0.0)
    return has(EndpointTag::kSingularOrbit) ? "S1xR2" : "T2xR";
  return "T2xR";
}

FiberStatus coassocFiberStatus(const Eigen::Vector3d& target, const fhn::Params& params,
                               double tol) {
  params.validate();
  const double t1 = target(0), t2 = target(1), t3 = target(2);
  switch (params.diagram) {
    case fhn::Diagram::kDeltaSU2: {
      // through the singular orbit iff (x, 0, 0), |x| <= 2 c1
      if (std::abs(t2) > tol || std::abs(t3) > tol) return FiberStatus::kNotThroughSingularSet;
      const double bound = 2.0 * params.c1;
      if (std::abs(std::abs(t1) - bound) <= tol) return FiberStatus::kSingularHLCone;
      if (std::abs(t1) < bound) return FiberStatus::kSmoothT2xR2;
      return FiberStatus::kNotThroughSingularSet;
    }
    case fhn::Diagram::kOneTimesSU2: {
      // (0, 0, x), |x| <= |4 c1|
      if (std::abs(t1) > tol || std::abs(t2) > tol) return FiberStatus::kNotThroughSingularSet;
      const double bound = 4.0 * std::abs(params.c1);
      if (std::abs(std::abs(t3) - bound) <= tol) return FiberStatus::kSingularHLCone;
      if (std::abs(t3) < bound) return FiberStatus::kSmoothT2xR2;
      return FiberStatus::kNotThroughSingularSet;
    }
    case fhn::Diagram::kKmn: {
      const double r03 = params.c2 / (params.n * params.n);
      const double m = params.m, n = params.n;
      // (2 m n r0^3 x y, -2 n (m+n) r0^3 y, -4 m (m+n) r0^3 x), x, y in [-1, 1]
      const double y = -t2 / (2.0 * n * (m + n) * r03);
      const double x = -t3 / (4.0 * m * (m + n) * r03);
      const double t1_expected = 2.0 * m * n * r03 * x * y;
      const double scale = std::abs(2.0 * m * n * r03);
      if (std::abs(t1 - t1_expected) > tol * std::max(1.0, scale))
        return FiberStatus::kNotThroughSingularSet;
      const bool x_edge = std::abs(std::abs(x) - 1.0) <= tol;
      const bool y_edge = std::abs(std::abs(y) - 1.0) <= tol;
      if (std::abs(x) > 1.0 + tol || std::abs(y) > 1.0 + tol)
        return FiberStatus::kNotThroughSingularSet;
      if (x_edge && y_edge) return FiberStatus::kSingularHLCone;
      if (x_edge || y_edge) return FiberStatus::kSmoothT2xR2;
      return FiberStatus::kSmoothT3xR;
    }
    default:
      throw UnknownCaseError("coassocFiberStatus: no singular orbit");
  }
}

FiberStatus bsCoassocFiberStatus(const Eigen::Vector3d& target, double c, double tol) {
  if (c <= 0.0) throw UnknownCaseError("bsCoassocFiberStatus: c must be positive");
  const double bound = 3.0 * std::sqrt(3.0) / 4.0 * c;
  const double t1 = target(0), t2 = target(1), t3 = target(2);
  if (std::abs(t2) <= tol && std::abs(t3) <= tol) {
    if (std::abs(std::abs(t1) - bound) <= tol) return FiberStatus::kSingularHLCone;
    if (std::abs(t1) < bound) return FiberStatus::kSmoothT2xR2;
    return FiberStatus::kNotThroughSingularSet;
  }
  // the half-line families (+-(bound + a), -+a, +-2a) and (+-(bound + a), +-a, -+2a)
  const double a = std::abs(t2);
  const bool on_cone_arm = std::abs(std::abs(t1) - (bound + a)) <= tol * std::max(1.0, bound) &&
                           std::abs(t3 + 2.0 * std::copysign(1.0, t1) * t2) <= tol;
  return on_cone_arm ? FiberStatus::kSmoothT2xR2 : FiberStatus::kNotThroughSingularSet;
}

namespace {

struct UvData {
  double u, udot, v, vdot;
};

UvData uvAt(const fhn::Solution& sol, double t) {
  const fhn::State s = sol.at(t);
  const fhn::Params& p = sol.params();
  UvData d;
  d.u = 4.0 * s.x1;
  d.udot = -fhn::lambdaA(s.a, s.b, p) / std::sqrt(fhn::minusLambda(s.a, s.b, p));
  const double raw = s.b - p.c1;
  const double sign = raw >= 0.0 ? 1.0 : -1.0;
  d.v = 4.0 * sign * raw;
  d.vdot = 4.0 * sign * s.bdot();
  return d;
}

}  // namespace

FibrationResult alphaFibrationTest(const fhn::Solution& solution) {
  const int n = 400;
  FibrationResult res;
  res.u_min = res.v_min = std::numeric_limits<double>::infinity();
  res.u_max = res.v_max = 0.0;
  int sign_ref = 0;
  for (int i = 0; i <= n; ++i) {
    const double t = solution.tBegin() + (solution.tEnd() - solution.tBegin()) * i / n;
    const UvData d = uvAt(solution, t);
    const int su = d.udot > 0.0 ? 1 : (d.udot < 0.0 ? -1 : 0);
    const int sv = d.vdot > 0.0 ? 1 : (d.vdot < 0.0 ? -1 : 0);
    if (su == 0 || su != sv) {
      std::ostringstream msg;
      msg << "alphaFibrationTest: udot, vdot sign condition fails at t = " << t
          << " (udot = " << d.udot << ", vdot = " << d.vdot << ")";
      throw HypothesisFailedError(msg.str());
    }
    if (sign_ref == 0) sign_ref = su;
    if (su != sign_ref)
      throw HypothesisFailedError("alphaFibrationTest: derivative sign flips inside the domain");
    res.u_min = std::min(res.u_min, d.u);
    res.u_max = std::max(res.u_max, d.u);
    res.v_min = std::min(res.v_min, d.v);
    res.v_max = std::max(res.v_max, d.v);
  }
  const bool inf_zero =
      solution.fromSingularOrbit() || res.u_min <= 1e-9 * std::max(1.0, res.u_max);
  res.status = inf_zero ? FibrationStatus::kGlobalFibration : FibrationStatus::kSplitRequired;
  return res;
}

double alphaJacobianMin(const fhn::Solution& solution, int n_grid) {
  double min_abs = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n_grid; ++i) {
    const double theta = kPi * i / n_grid;
    const double s2 = std::sin(theta) * std::sin(theta);
    const double c2 = std::cos(theta) * std::cos(theta);
    for (int j = 0; j <= n_grid; ++j) {
      const double t =
          solution.tBegin() + (solution.tEnd() - solution.tBegin()) * j / n_grid;
      const UvData d = uvAt(solution, t);
      min_abs = std::min(min_abs, std::abs(d.udot * d.v * s2 + d.u * d.vdot * c2));
    }
  }
  return min_abs;
}

double gradientOrthogonalityResidual(const fhn::Solution& solution, double theta, double t) {
  const UvData d = uvAt(solution, t);
  const double G = moments::quotientThetaMetric(solution, theta, t);
  const double s = std::sin(theta), c = std::cos(theta);
  // |mu| = u sin(theta), nu = -4 (b - c1) cos(theta) = sign * v cos(theta)
  const double du_t = d.udot * s, du_th = d.u * c;
  const double dv_t = d.vdot * c, dv_th = -d.v * s;
  const double inner = du_t * dv_t + du_th * dv_th / G;
  const double n1 = std::sqrt(du_t * du_t + du_th * du_th / G);
  const double n2 = std::sqrt(dv_t * dv_t + dv_th * dv_th / G);
  return std::abs(inner) / std::max(1e-300, n1 * n2);
}

namespace {

const char* kindName(CurveKind k) {
  return k == CurveKind::kAssociative ? "assoc" : "coassoc";
}

void writeSvg(std::ofstream& svg, const std::vector<LevelSetCurve>& curves, double t_lo,
              double t_hi) {
  const double width = 640, height = 480, margin = 40;
  auto mapx = [&](double theta) { return margin + theta / kPi * (width - 2 * margin); };
  auto mapy = [&](double t) {
    return height - margin - (t - t_lo) / (t_hi - t_lo) * (height - 2 * margin);
  };
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
      << "\" height=\"" << height - 2 * margin << "\" fill=\"white\" stroke=\"black\"/>\n";
  for (const auto& curve : curves) {
    const bool singular_line =
        curve.kind == CurveKind::kCoassociative && curve.level == 0.0;
    const char* color = curve.kind == CurveKind::kAssociative ? "#1f77b4" : "#ff7f0e";
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
        << (singular_line ? 2.5 : 1.2) << "\"";
    if (singular_line) svg << " stroke-dasharray=\"6,3\"";
    svg << " points=\"";
    for (const auto& pt : curve.points) svg << mapx(pt.theta) << "," << mapy(pt.t) << " ";
    svg << "\"/>\n";
    if (singular_line)
      svg << "<circle cx=\"" << mapx(kPi / 2) << "\" cy=\"" << mapy(t_lo)
          << "\" r=\"5\" fill=\"red\"/>\n";
  }
  svg << "</svg>\n";
}

}  // namespace

RenderResult renderLevelsets(const fhn::Solution& solution,
                             const std::vector<double>& mu_levels,
                             const std::vector<double>& nu_levels, const std::string& csv_path,
                             const std::string& svg_path, NuConvention convention,
                             std::optional<double> bs_c) {
  std::vector<LevelSetCurve> curves;
  for (double level : mu_levels) {
    auto traced = traceAssociative(solution, level, 1e-3 * (solution.tEnd() - solution.tBegin()));
    curves.insert(curves.end(), traced.begin(), traced.end());
  }
  for (double level : nu_levels)
    curves.push_back(traceCoassociative(
        solution, level, 1e-3 * (solution.tEnd() - solution.tBegin()), convention));

  RenderResult result;
  result.curve_count = static_cast<int>(curves.size());
  if (bs_c) {
    const double x = 3.0 * std::sqrt(3.0) / 4.0 * (*bs_c);
    result.singular_fibers.push_back({x, 0.0, 0.0});
    result.singular_fibers.push_back({-x, 0.0, 0.0});
  }

  std::ofstream csv(csv_path);
  if (!csv) throw IoFailureError("renderLevelsets: cannot write " + csv_path);
  csv << "curve_id,kind,level,theta,t\n";
  csv << std::setprecision(12);
  int id = 0;
  for (const auto& curve : curves) {
    for (const auto& pt : curve.points) {
      csv << id << "," << kindName(curve.kind) << "," << curve.level << "," << pt.theta << ","
          << pt.t << "\n";
      ++result.point_count;
    }
    ++id;
  }
  for (const auto& fiber : result.singular_fibers)
    csv << "# singular_fiber," << fiber(0) << "," << fiber(1) << "," << fiber(2) << "\n";

  std::ofstream svg(svg_path);
  if (!svg) throw IoFailureError("renderLevelsets: cannot write " + svg_path);
  writeSvg(svg, curves, solution.tBegin(), solution.tEnd());
  return result;
}

}  // namespace g2cal::tracer
