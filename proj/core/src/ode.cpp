#include "g2cal/ode.hpp"

#include <array>

namespace g2cal::ode {

namespace {

constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kC[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kB4[7] = {5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace

State hermite(const Sample& a, const Sample& b, double t) {
  const double h = b.t - a.t;
  const double s = (t - a.t) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  State r(a.y.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = h00 * a.y[i] + h10 * h * a.dy[i] + h01 * b.y[i] + h11 * h * b.dy[i];
  return r;
}

State hermiteDerivative(const Sample& a, const Sample& b, double t) {
  const double h = b.t - a.t;
  const double s = (t - a.t) / h;
  const double d00 = 6 * s * (s - 1) / h;
  const double d10 = (1 - s) * (1 - 3 * s);
  const double d01 = -6 * s * (s - 1) / h;
  const double d11 = s * (3 * s - 2);
  State r(a.y.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = d00 * a.y[i] + d10 * a.dy[i] + d01 * b.y[i] + d11 * b.dy[i];
  return r;
}

Result integrate(const Rhs& rhs, double t0, const State& y0, double t_end,
                 const Options& options) {
  Result result;
  const double dir = t_end >= t0 ? 1.0 : -1.0;
  const std::size_t n = y0.size();

  double t = t0;
  State y = y0;
  State k1 = rhs(t, y);
  result.samples.push_back({t, y, k1});

  double h = dir * std::abs(options.initial_step);
  const double span = std::abs(t_end - t0);
  if (options.max_step > 0.0) h = dir * std::min(std::abs(h), options.max_step);

  int consecutive_failures = 0;
  while (dir * (t_end - t) > 0.0) {
    if (dir * (t + h - t_end) > 0.0) h = t_end - t;
    if (std::abs(h) < 1e-15 * std::max(1.0, std::abs(t))) {
      result.termination = Termination::kStepFailure;
      return result;
    }

    std::array<State, 7> k;
    k[0] = k1;
    bool stage_ok = true;
    State y5;
    for (int s = 1; s < 7 && stage_ok; ++s) {
      State ys = y;
      for (int j = 0; j < s; ++j)
        for (std::size_t i = 0; i < n; ++i) ys[i] += h * kA[s][j] * k[j][i];
      if (s == 6) y5 = ys;  // the a7 row is the 5th-order solution
      try {
        k[s] = rhs(t + kC[s] * h, ys);
      } catch (const std::domain_error&) {
        stage_ok = false;
      }
    }

    double err = 0.0;
    if (stage_ok) {
      for (std::size_t i = 0; i < n; ++i) {
        double e4 = y[i];
        for (int s = 0; s < 7; ++s) e4 += h * kB4[s] * k[s][i];
        const double sc =
            options.abs_tol + options.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
        const double e = (y5[i] - e4) / sc;
        err += e * e;
      }
      err = std::sqrt(err / n);
    }

    if (!stage_ok || err > 1.0) {
      const double shrink = stage_ok ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.5;
      h *= shrink;
      if (++consecutive_failures > 60) {
        result.termination = Termination::kStepFailure;
        return result;
      }
      continue;
    }
    consecutive_failures = 0;

    Sample next{t + h, y5, k[6]};  // FSAL: k7 = f(t+h, y5)
    if (options.event) {
      const double e1 = options.event(next.t, next.y);
      if (e1 <= 0.0) {
        // bisect the event time on the dense output of this step
        const Sample prev{t, y, k[0]};
        double lo = t, hi = next.t;
        while (std::abs(hi - lo) > options.event_tol * std::max(1.0, std::abs(hi))) {
          const double mid = 0.5 * (lo + hi);
          const State ym = hermite(prev, next, mid);
          if (options.event(mid, ym) > 0.0)
            lo = mid;
          else
            hi = mid;
        }
        const State ystar = hermite(prev, next, lo);
        result.samples.push_back({lo, ystar, hermiteDerivative(prev, next, lo)});
        result.termination = Termination::kEvent;
        result.event_time = lo;
        return result;
      }
    }

    t = next.t;
    y = next.y;
    k1 = next.dy;
    result.samples.push_back(std::move(next));

    double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::clamp(grow, 0.2, 5.0);
    if (options.max_step > 0.0 && std::abs(h) > options.max_step) h = dir * options.max_step;
    if (std::abs(h) > span) h = dir * span;
  }
  return result;
}

}  // namespace g2cal::ode
