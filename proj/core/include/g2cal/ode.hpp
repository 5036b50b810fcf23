#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace g2cal {

struct StepFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dormand-Prince 5(4) with adaptive step control and cubic-Hermite dense
/// output. State is a flat vector; the right-hand side may throw to signal
/// leaving the admissible region (the caller's event function handles the
/// boundary).
namespace ode {

using State = std::vector<double>;
using Rhs = std::function<State(double, const State&)>;

struct Sample {
  double t;
  State y;
  State dy;
};

/// Dense cubic-Hermite interpolation between two samples.
State hermite(const Sample& a, const Sample& b, double t);
State hermiteDerivative(const Sample& a, const Sample& b, double t);

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 1e-4;
  double max_step = 0.0;  // 0 = unlimited
  /// Admissibility monitor: positive inside the domain. When it crosses zero
  /// within a step, the trajectory is truncated at the bisected root.
  std::function<double(double, const State&)> event;
  double event_tol = 1e-12;
};

enum class Termination { kReachedEnd, kEvent, kStepFailure };

struct Result {
  std::vector<Sample> samples;
  Termination termination = Termination::kReachedEnd;
  double event_time = 0.0;
};

/// Integrate from (t0, y0) to t_end (t_end < t0 integrates backwards).
Result integrate(const Rhs& rhs, double t0, const State& y0, double t_end,
                 const Options& options = {});

}  // namespace ode
}  // namespace g2cal
