#include "g2cal/fhn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace g2cal::fhn {

namespace {

constexpr int kCyc[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};

double cubeRoot(double x) { return std::copysign(std::pow(std::abs(x), 1.0 / 3.0), x); }

}  // namespace

void Params::validate() const {
  switch (diagram) {
    case Diagram::kDeltaSU2:
      if (std::abs(c1 + c2) > 1e-12 * std::max(1.0, std::abs(c1)) || c1 <= 0.0)
        throw InconsistentParamsError("Delta SU(2) requires c1 + c2 = 0 and c1 > 0");
      break;
    case Diagram::kOneTimesSU2:
      if (c2 != 0.0 || c1 >= 0.0)
        throw InconsistentParamsError("{1} x SU(2) requires c2 = 0 and c1 < 0");
      break;
    case Diagram::kKmn: {
      if (m == 0 || n == 0 || static_cast<long long>(m) * n <= 0)
        throw InconsistentParamsError("K_{m,n} requires m n > 0");
      if (std::gcd(std::abs(m), std::abs(n)) != 1)
        throw InconsistentParamsError("K_{m,n} requires gcd(m, n) = 1");
      if (c1 >= 0.0 || c2 <= 0.0)
        throw InconsistentParamsError("K_{m,n} requires c1 = -m^2 r0^3 < 0 < c2 = n^2 r0^3");
      const double r0_from_c1 = cubeRoot(-c1 / (m * m));
      const double r0_from_c2 = cubeRoot(c2 / (n * n));
      if (std::abs(r0_from_c1 - r0_from_c2) > 1e-9 * std::max(1.0, std::abs(r0_from_c1)))
        throw InconsistentParamsError("K_{m,n}: c1, c2 incompatible with a common r0");
      break;
    }
    case Diagram::kNoSingularOrbit:
      break;
  }
}

double State::adot() const { return std::sqrt(x2); }
double State::bdot() const { return x1 / std::sqrt(x2); }

double bigLambda(double a1, double a2, double a3, const Params& p) {
  const double s2 = a1 * a1 + a2 * a2 + a3 * a3;
  return a1 * a1 * a1 * a1 + a2 * a2 * a2 * a2 + a3 * a3 * a3 * a3 -
         2.0 * (a1 * a1 * a2 * a2 + a2 * a2 * a3 * a3 + a3 * a3 * a1 * a1) +
         4.0 * (p.c1 - p.c2) * a1 * a2 * a3 + 2.0 * p.c1 * p.c2 * s2 +
         p.c1 * p.c1 * p.c2 * p.c2;
}

double minusLambda(double a, double b, const Params& p) {
  const double q = b * b + p.c1 * p.c2;
  return 4.0 * a * a * (b - p.c1) * (b + p.c2) - q * q;
}

double lambdaA(double a, double b, const Params& p) {
  return -8.0 * a * (b - p.c1) * (b + p.c2);
}

double lambdaB(double a, double b, const Params& p) {
  return -4.0 * a * a * (2.0 * b + p.c2 - p.c1) + 4.0 * b * (b * b + p.c1 * p.c2);
}

double hamiltonian(const State& s, const Params& p) {
  const double ml = minusLambda(s.a, s.b, p);
  if (ml <= 0.0) throw OutsideConeError("hamiltonian: Lambda(a, b) >= 0");
  if (s.x1 <= 0.0 || s.x2 <= 0.0) throw OutsideConeError("hamiltonian: x1, x2 must be positive");
  return std::sqrt(ml) - 2.0 * std::sqrt(s.x1 * s.x1 * s.x2);
}

std::array<double, 4> enhancedOdeRhs(const State& s, const Params& p) {
  const double ml = minusLambda(s.a, s.b, p);
  if (ml <= 0.0) throw OutsideConeError("enhancedOdeRhs: Lambda(a, b) >= 0");
  if (s.x1 <= 0.0 || s.x2 <= 0.0)
    throw OutsideConeError("enhancedOdeRhs: x1, x2 must be positive");
  const double root = std::sqrt(s.x1 * s.x1 * s.x2);
  const double sqrt_ml = std::sqrt(ml);
  return {s.x1 * s.x2 / root, s.x1 * s.x1 / root, -lambdaA(s.a, s.b, p) / (4.0 * sqrt_ml),
          -lambdaB(s.a, s.b, p) / (2.0 * sqrt_ml)};
}

State singularIc(const Params& params, const SingularData& data, double epsilon) {
  params.validate();
  if (epsilon <= 0.0) throw InconsistentParamsError("singularIc: epsilon must be positive");
  State s;
  s.t = epsilon;
  switch (params.diagram) {
    case Diagram::kDeltaSU2: {
      const double alpha_req = cubeRoot(params.c1 / 8.0);
      const double alpha = data.alpha != 0.0 ? data.alpha : alpha_req;
      if (std::abs(8.0 * alpha * alpha * alpha - params.c1) >
          1e-9 * std::max(1.0, std::abs(params.c1)))
        throw InconsistentParamsError("singularIc: 8 alpha^3 != c1");
      s.a = s.b = params.c1 + 0.5 * alpha * epsilon * epsilon;
      const double adot = alpha * epsilon;
      s.x1 = adot * adot;
      s.x2 = adot * adot;
      break;
    }
    case Diagram::kOneTimesSU2: {
      const double alpha_a = data.alpha != 0.0 ? data.alpha : cubeRoot(-params.c1 / 8.0);
      const double alpha_b = data.alpha_b != 0.0 ? data.alpha_b : alpha_a;
      if (alpha_a <= 0.0 || alpha_b <= 0.0 ||
          std::abs(8.0 * alpha_a * alpha_a * alpha_b + params.c1) >
              1e-9 * std::max(1.0, std::abs(params.c1)))
        throw InconsistentParamsError("singularIc: 8 alpha_2 alpha_3 alpha_1 != -c1");
      s.a = 0.5 * alpha_a * epsilon * epsilon;
      s.b = 0.5 * alpha_b * epsilon * epsilon;
      s.x1 = alpha_a * alpha_b * epsilon * epsilon;
      s.x2 = alpha_a * alpha_a * epsilon * epsilon;
      break;
    }
    case Diagram::kKmn: {
      const double r0 = data.r0 != 0.0 ? data.r0 : cubeRoot(-params.c1 / (params.m * params.m));
      if (std::abs(params.c1 + params.m * params.m * r0 * r0 * r0) > 1e-9 ||
          std::abs(params.c2 - params.n * params.n * r0 * r0 * r0) > 1e-9)
        throw InconsistentParamsError("singularIc: r0 incompatible with c1 = -m^2 r0^3, c2 = n^2 r0^3");
      const double alpha = data.alpha != 0.0 ? data.alpha : 1.0;  // adot(0), free
      const double b0 = params.m * params.n * r0 * r0 * r0;
      // b-series curvature from H = 0: beta = sqrt(m n) (m + n) r0^3 / alpha.
      const double beta =
          std::sqrt(static_cast<double>(params.m) * params.n) * (params.m + params.n) *
          std::abs(r0 * r0 * r0) / alpha;
      s.a = alpha * epsilon;
      s.b = b0 + 0.5 * beta * epsilon * epsilon;
      s.x1 = alpha * beta * epsilon;
      s.x2 = alpha * alpha;
      break;
    }
    case Diagram::kNoSingularOrbit:
      throw InconsistentParamsError("singularIc: diagram has no singular orbit");
  }
  return s;
}

Solution::Solution(Params params, std::vector<ode::Sample> samples, Termination termination,
                   double cone_exit_time, bool from_singular_orbit)
    : params_(params),
      samples_(std::move(samples)),
      termination_(termination),
      cone_exit_time_(cone_exit_time),
      from_singular_orbit_(from_singular_orbit) {
  // normalize to increasing t (backward integrations arrive reversed)
  if (samples_.size() > 1 && samples_.front().t > samples_.back().t)
    std::reverse(samples_.begin(), samples_.end());
  // Prefix values of the eta integrand on the sample grid (Simpson on each
  // step, dense midpoints).
  eta_prefix_.assign(samples_.size(), 0.0);
  auto integrand = [this](double a, double b) {
    const double ml = minusLambda(a, b, params_);
    return (2.0 * b * a * a + params_.c2 * (b * b + 2.0 * a * a + params_.c1 * params_.c2)) /
           std::sqrt(std::max(ml, 1e-300));
  };
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    const auto& lo = samples_[i - 1];
    const auto& hi = samples_[i];
    const double h = hi.t - lo.t;
    const ode::State mid = ode::hermite(lo, hi, lo.t + 0.5 * h);
    const double f0 = integrand(lo.y[0], lo.y[1]);
    const double fm = integrand(mid[0], mid[1]);
    const double f1 = integrand(hi.y[0], hi.y[1]);
    eta_prefix_[i] = eta_prefix_[i - 1] + h / 6.0 * (f0 + 4.0 * fm + f1);
  }
}

State Solution::at(double t) const {
  const double lo = tBegin(), hi = tEnd();
  if (t < lo - 1e-12 * std::max(1.0, std::abs(lo)) ||
      t > hi + 1e-12 * std::max(1.0, std::abs(hi)))
    throw OutOfDomainError("Solution::at: t outside trajectory domain");
  t = std::clamp(t, lo, hi);
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](double v, const ode::Sample& s) { return v < s.t; });
  const std::size_t hi_idx =
      std::clamp<std::size_t>(static_cast<std::size_t>(it - samples_.begin()), 1,
                              samples_.size() - 1);
  const ode::State y = ode::hermite(samples_[hi_idx - 1], samples_[hi_idx], t);
  return State{t, y[0], y[1], y[2], y[3]};
}

double Solution::etaIntegral(double t) const {
  const State probe = at(t);  // domain check
  auto it = std::upper_bound(samples_.begin(), samples_.end(), probe.t,
                             [](double v, const ode::Sample& s) { return v < s.t; });
  const std::size_t hi_idx =
      std::clamp<std::size_t>(static_cast<std::size_t>(it - samples_.begin()), 1,
                              samples_.size() - 1);
  const auto& lo = samples_[hi_idx - 1];
  auto integrand = [this](const ode::State& y) {
    return (2.0 * y[1] * y[0] * y[0] +
            params_.c2 * (y[1] * y[1] + 2.0 * y[0] * y[0] + params_.c1 * params_.c2)) /
           std::sqrt(std::max(minusLambda(y[0], y[1], params_), 1e-300));
  };
  const double h = probe.t - lo.t;
  if (std::abs(h) < 1e-300) return eta_prefix_[hi_idx - 1];
  const ode::State mid = ode::hermite(lo, samples_[hi_idx], lo.t + 0.5 * h);
  const ode::State end = ode::hermite(lo, samples_[hi_idx], probe.t);
  return eta_prefix_[hi_idx - 1] +
         h / 6.0 * (integrand(lo.y) + 4.0 * integrand(mid) + integrand(end));
}

namespace {

/// Reduced integration on the invariant locus a = b, x1 = x2.
Solution integrateSymmetric(const Params& params, const State& initial, double t_end,
                            double tol) {
  ode::Rhs rhs = [&params](double, const ode::State& y) -> ode::State {
    const State s{0.0, y[0], y[0], y[1], y[1]};
    const auto d = enhancedOdeRhs(s, params);
    return {d[0], 0.5 * (d[2] + d[3])};
  };
  ode::Options opts;
  opts.rel_tol = tol;
  opts.abs_tol = tol * 1e-2;
  opts.initial_step = std::min(1e-3, std::abs(t_end - initial.t) / 100.0);
  opts.max_step = std::abs(t_end - initial.t) / 2000.0;
  opts.event = [&params](double, const ode::State& y) {
    return std::min(minusLambda(y[0], y[0], params), y[1]);
  };
  opts.event_tol = 1e-12;

  ode::Result r = ode::integrate(rhs, initial.t, {initial.a, initial.x1}, t_end, opts);
  Termination term = Termination::kReachedEnd;
  double exit_time = 0.0;
  if (r.termination == ode::Termination::kEvent) {
    term = Termination::kConeExit;
    exit_time = r.event_time;
  } else if (r.termination == ode::Termination::kStepFailure) {
    const ode::State& last = r.samples.back().y;
    if (std::min(minusLambda(last[0], last[0], params), last[1]) >
        1e-6 * (1.0 + std::abs(last[0])))
      throw StepFailureError("fhn::integrate: step size underflow");
    term = Termination::kConeExit;
    exit_time = r.samples.back().t;
  }
  std::vector<ode::Sample> expanded;
  expanded.reserve(r.samples.size());
  for (const auto& sample : r.samples)
    expanded.push_back({sample.t,
                        {sample.y[0], sample.y[0], sample.y[1], sample.y[1]},
                        {sample.dy[0], sample.dy[0], sample.dy[1], sample.dy[1]}});
  return Solution(params, std::move(expanded), term, exit_time, false);
}

}  // namespace

Solution integrate(const Params& params, const State& initial, double t_end, double tol) {
  // The locus {a = b, x1 = x2} is invariant (e.g. all Delta SU(2) solutions
  // and the Bryant-Salamon ones live on it), but transversally unstable near
  // the singular orbit; symmetric seeds are integrated in the reduced
  // variables so roundoff cannot seed the instability.
  if (initial.a == initial.b && initial.x1 == initial.x2)
    return integrateSymmetric(params, initial, t_end, tol);

  ode::Rhs rhs = [&params](double, const ode::State& y) -> ode::State {
    const State s{0.0, y[0], y[1], y[2], y[3]};
    const auto d = enhancedOdeRhs(s, params);
    return {d[0], d[1], d[2], d[3]};
  };
  ode::Options opts;
  opts.rel_tol = tol;
  opts.abs_tol = tol * 1e-2;
  opts.initial_step = std::min(1e-3, std::abs(t_end - initial.t) / 100.0);
  // the cubic-Hermite dense output needs moderate steps to stay within tol
  opts.max_step = std::abs(t_end - initial.t) / 2000.0;
  opts.event = [&params](double, const ode::State& y) {
    return std::min({minusLambda(y[0], y[1], params), y[2], y[3]});
  };
  opts.event_tol = 1e-12;

  const ode::State y0{initial.a, initial.b, initial.x1, initial.x2};
  ode::Result r = ode::integrate(rhs, initial.t, y0, t_end, opts);
  Termination term = Termination::kReachedEnd;
  double exit_time = 0.0;
  if (r.termination == ode::Termination::kEvent) {
    term = Termination::kConeExit;
    exit_time = r.event_time;
  } else if (r.termination == ode::Termination::kStepFailure) {
    // a step collapse with the cone monitor already tiny is the asymptotic
    // approach to Lambda = 0, not an integration failure
    const ode::State& last = r.samples.back().y;
    const double monitor = std::min({minusLambda(last[0], last[1], params), last[2], last[3]});
    if (monitor > 1e-6 * (1.0 + std::abs(last[0]) + std::abs(last[1])))
      throw StepFailureError("fhn::integrate: step size underflow");
    term = Termination::kConeExit;
    exit_time = r.samples.back().t;
  }
  return Solution(params, std::move(r.samples), term, exit_time, false);
}

Solution integrateFromSingularOrbit(const Params& params, const SingularData& data,
                                    double t_end, double tol, double epsilon) {
  if (epsilon <= 0.0) epsilon = 1e-3 * std::max(1.0, std::sqrt(std::abs(params.c1)));
  const State seed = singularIc(params, data, epsilon);
  Solution sol = integrate(params, seed, t_end, tol);
  return Solution(sol.params(), std::vector<ode::Sample>(sol.samples()), sol.termination(),
                  sol.coneExitTime(), true);
}

State bsClosedForm(double r, double c) {
  State s;
  const double sqrt3 = std::sqrt(3.0);
  s.a = s.b = 0.5 * sqrt3 * r * r;
  const double adot = 0.5 * sqrt3 * r * std::pow(c + r * r, 1.0 / 6.0);
  s.x1 = adot * adot;
  s.x2 = adot * adot;
  return s;
}

double bsDrDt(double r, double c) { return 0.5 * std::pow(c + r * r, 1.0 / 6.0); }

namespace {

double simpsonAdaptive(const std::function<double(double)>& f, double lo, double hi, double fl,
                       double fm, double fh, double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
  const double flm = f(lm), frm = f(rm);
  const double whole = (hi - lo) / 6.0 * (fl + 4.0 * fm + fh);
  const double left = (mid - lo) / 6.0 * (fl + 4.0 * flm + fm);
  const double right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fh);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpsonAdaptive(f, lo, mid, fl, flm, fm, tol / 2, depth - 1) +
         simpsonAdaptive(f, mid, hi, fm, frm, fh, tol / 2, depth - 1);
}

}  // namespace

double bsArcLength(double r, double c) {
  auto f = [c](double s) { return 2.0 * std::pow(c + s * s, -1.0 / 6.0); };
  return simpsonAdaptive(f, 0.0, r, f(0.0), f(0.5 * r), f(r), 1e-12, 40);
}

Params bsParams(double c) {
  Params p;
  p.c1 = -3.0 / 8.0 * std::sqrt(3.0) * c;
  p.c2 = 0.0;
  p.diagram = Diagram::kOneTimesSU2;
  return p;
}

namespace {

AlternatingForm assemblePhiRaw(double a, double b, double adot, double bdot, const Params& p) {
  const double av[3] = {b, a, a};
  const double ad[3] = {bdot, adot, adot};
  AlternatingForm phi(7, 3);
  phi.add(std::array{kE1, kE1 + 1, kE1 + 2}, -8.0 * p.c1);
  phi.add(std::array{kF1, kF1 + 1, kF1 + 2}, -8.0 * p.c2);
  for (const auto& [i, j, k] : kCyc) {
    // 4 d(a_i e_i ^ f_i) = 4 adot_i dt^e_i^f_i + 8 a_i (e_j^e_k^f_i - e_i^f_j^f_k)
    phi.add(std::array{kDt, kE1 + i, kF1 + i}, 4.0 * ad[i]);
    phi.add(std::array{kE1 + j, kE1 + k, kF1 + i}, 8.0 * av[i]);
    phi.add(std::array{kE1 + i, kF1 + j, kF1 + k}, -8.0 * av[i]);
  }
  return phi;
}

AlternatingForm assembleStarPhiRaw(double a, double b, double adot, double bdot,
                                   const Params& p) {
  const double av[3] = {b, a, a};
  const double ad[3] = {bdot, adot, adot};
  const double ml = minusLambda(a, b, p);
  if (ml <= 0.0) throw OutsideConeError("assembleStarPhi: Lambda(a, b) >= 0");
  const double pre = 8.0 / std::sqrt(ml);
  const double s2 = av[0] * av[0] + av[1] * av[1] + av[2] * av[2] + p.c1 * p.c2;
  const double triple = 2.0 * av[0] * av[1] * av[2];

  AlternatingForm sp(7, 4);
  for (const auto& [i, j, k] : kCyc)
    sp.add(std::array{kE1 + j, kF1 + j, kE1 + k, kF1 + k}, 16.0 * ad[j] * ad[k]);
  sp.add(std::array{kDt, kE1, kE1 + 1, kE1 + 2}, pre * (triple - p.c1 * s2));
  sp.add(std::array{kDt, kF1, kF1 + 1, kF1 + 2}, pre * (triple + p.c2 * s2));
  for (const auto& [i, j, k] : kCyc) {
    const double core = av[i] * (av[i] * av[i] - av[j] * av[j] - av[k] * av[k] + p.c1 * p.c2);
    sp.add(std::array{kDt, kE1 + i, kF1 + j, kF1 + k}, pre * (core - 2.0 * p.c2 * av[j] * av[k]));
    sp.add(std::array{kDt, kF1 + i, kE1 + j, kE1 + k}, pre * (core + 2.0 * p.c1 * av[j] * av[k]));
  }
  return sp;
}

}  // namespace

AlternatingForm assemblePhi(const State& s, const Params& p) {
  return assemblePhiRaw(s.a, s.b, s.adot(), s.bdot(), p);
}
AlternatingForm assemblePhi(const Solution& solution, double t) {
  return assemblePhi(solution.at(t), solution.params());
}
AlternatingForm assembleStarPhi(const State& s, const Params& p) {
  return assembleStarPhiRaw(s.a, s.b, s.adot(), s.bdot(), p);
}
AlternatingForm assembleStarPhi(const Solution& solution, double t) {
  return assembleStarPhi(solution.at(t), solution.params());
}

AlternatingForm coframeExteriorDerivative(const AlternatingForm& at_t,
                                          const AlternatingForm& at_t_minus_h,
                                          const AlternatingForm& at_t_plus_h, double h) {
  const int k = at_t.degree();
  AlternatingForm d(7, k + 1);

  // dt ^ (coefficient time derivative)
  AlternatingForm dot = at_t_plus_h - at_t_minus_h;
  dot *= 1.0 / (2.0 * h);
  const AlternatingForm dt_cov = AlternatingForm::covector(7, kDt);
  d += wedge(dt_cov, dot);

  // structure terms: d(dt) = 0, de_i = 2 e_j^e_k, df_i = 2 f_j^f_k
  auto d_basis = [](int idx) {
    AlternatingForm two_form(7, 2);
    if (idx >= kE1 && idx < kE1 + 3) {
      const int i = idx - kE1;
      two_form.add(std::array{kE1 + kCyc[i][1], kE1 + kCyc[i][2]}, 2.0);
    } else if (idx >= kF1) {
      const int i = idx - kF1;
      two_form.add(std::array{kF1 + kCyc[i][1], kF1 + kCyc[i][2]}, 2.0);
    }
    return two_form;
  };

  std::vector<int> ext(k + 1);
  for (std::size_t r = 0; r < at_t.size(); ++r) {
    if (at_t.coeff(r) == 0.0) continue;
    const std::vector<int> idx = at_t.indicesAtRank(r);
    for (int pos = 0; pos < k; ++pos) {
      const AlternatingForm db = d_basis(idx[pos]);
      if (db.maxAbsCoeff() == 0.0) continue;
      const double sign = (pos % 2 == 0) ? 1.0 : -1.0;
      for (std::size_t rb = 0; rb < db.size(); ++rb) {
        if (db.coeff(rb) == 0.0) continue;
        const std::vector<int> pair = db.indicesAtRank(rb);
        int w = 0;
        ext[w++] = pair[0];
        ext[w++] = pair[1];
        for (int m = 0; m < k; ++m)
          if (m != pos) ext[w++] = idx[m];
        d.add(ext, sign * at_t.coeff(r) * db.coeff(rb));
      }
    }
  }
  return d;
}

std::pair<double, double> closednessResidual(const Solution& solution, double t, double h) {
  return closednessResidualPerturbed(solution, t, h, 0.0);
}

std::pair<double, double> closednessResidualPerturbed(const Solution& solution, double t,
                                                      double h, double delta_a) {
  const Params& p = solution.params();
  auto forms_at = [&](double tt) {
    State s = solution.at(tt);
    s.a += delta_a;
    return std::pair{assemblePhi(s, p), assembleStarPhi(s, p)};
  };
  const auto [phi_m, sp_m] = forms_at(t - h);
  const auto [phi_0, sp_0] = forms_at(t);
  const auto [phi_p, sp_p] = forms_at(t + h);
  const AlternatingForm dphi = coframeExteriorDerivative(phi_0, phi_m, phi_p, h);
  const AlternatingForm dsp = coframeExteriorDerivative(sp_0, sp_m, sp_p, h);
  return {dphi.maxAbsCoeff(), dsp.maxAbsCoeff()};
}

}  // namespace g2cal::fhn
