#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "g2cal/exterior.hpp"
#include "g2cal/ode.hpp"

namespace g2cal::fhn {

struct OutsideConeError : std::domain_error {
  using std::domain_error::domain_error;
};
struct InconsistentParamsError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct OutOfDomainError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

enum class Diagram { kDeltaSU2, kOneTimesSU2, kKmn, kNoSingularOrbit };

struct Params {
  double c1 = 0.0;
  double c2 = 0.0;
  Diagram diagram = Diagram::kNoSingularOrbit;
  int m = 0, n = 0;  // K_{m,n} only; gcd(m,n) = 1 and m n > 0

  /// Throws InconsistentParamsError when the diagram constraints fail
  /// (Delta: c1 + c2 = 0, c1 > 0; {1}xSU(2): c2 = 0, c1 < 0;
  ///  K_{m,n}: gcd(m,n) = 1, m n > 0, c1 = -m^2 r0^3, c2 = n^2 r0^3).
  void validate() const;
};

/// Enhanced-symmetry ODE state: a = a2 = a3, b = a1, x1 = adot*bdot,
/// x2 = adot^2. Interior states have x1, x2 > 0 and Lambda(a, b) < 0.
struct State {
  double t = 0.0;
  double a = 0.0, b = 0.0;
  double x1 = 0.0, x2 = 0.0;

  double adot() const;
  double bdot() const;
};

/// The quartic Lambda(a1, a2, a3) of the cohomogeneity-one reduction.
double bigLambda(double a1, double a2, double a3, const Params& params);

/// -Lambda(a, b) = 4 a^2 (b - c1)(b + c2) - (b^2 + c1 c2)^2, positive in the cone.
double minusLambda(double a, double b, const Params& params);
/// Partials of Lambda(a, b) with respect to a and b.
double lambdaA(double a, double b, const Params& params);
double lambdaB(double a, double b, const Params& params);

/// H = sqrt(-Lambda(a,b)) - 2 sqrt(x1^2 x2); zero along torsion-free solutions.
/// Throws OutsideConeError when Lambda >= 0 or x1, x2 <= 0.
double hamiltonian(const State& state, const Params& params);

/// (da/dt, db/dt, dx1/dt, dx2/dt) of the enhanced Hamiltonian system.
std::array<double, 4> enhancedOdeRhs(const State& state, const Params& params);

/// Series data for the singular-orbit seed. Zeros select case defaults
/// (alpha = (|c1|/8)^(1/3) for Delta / {1}xSU(2); alpha = adot(0) for K_{m,n}).
struct SingularData {
  double alpha = 0.0;    // Delta: the single alpha; {1}xSU(2): alpha_2 = alpha_3
  double alpha_b = 0.0;  // {1}xSU(2): alpha_1 (b-series); 0 = same as alpha
  double r0 = 0.0;       // K_{m,n}: c1 = -m^2 r0^3, c2 = n^2 r0^3
};

/// State at t = epsilon from the even/odd series through quadratic order.
State singularIc(const Params& params, const SingularData& data, double epsilon);

enum class Termination { kReachedEnd, kConeExit, kStepFailure };

/// Torsion-free trajectory with cubic-Hermite dense output in (a, b, x1, x2).
class Solution {
public:
  Solution(Params params, std::vector<ode::Sample> samples, Termination termination,
           double cone_exit_time, bool from_singular_orbit);

  const Params& params() const { return params_; }
  double tBegin() const { return samples_.front().t; }
  double tEnd() const { return samples_.back().t; }
  Termination termination() const { return termination_; }
  double coneExitTime() const { return cone_exit_time_; }
  bool fromSingularOrbit() const { return from_singular_orbit_; }
  const std::vector<ode::Sample>& samples() const { return samples_; }

  /// Dense evaluation; throws OutOfDomainError outside [tBegin, tEnd].
  State at(double t) const;

  /// Primitive of the eta integrand
  /// (2 b a^2 + c2 (b^2 + 2 a^2 + c1 c2)) / sqrt(-Lambda), anchored to 0 at
  /// tBegin. Adaptive Simpson with prefix values cached on the sample grid.
  double etaIntegral(double t) const;

private:
  Params params_;
  std::vector<ode::Sample> samples_;
  Termination termination_;
  double cone_exit_time_;
  bool from_singular_orbit_;
  std::vector<double> eta_prefix_;
};

/// Adaptive integration until t_end or cone exit (reported via termination,
/// not thrown). Hamiltonian drift stays within ~10x the tolerance.
Solution integrate(const Params& params, const State& initial, double t_end, double tol);

/// Convenience: seed from the singular orbit and integrate.
Solution integrateFromSingularOrbit(const Params& params, const SingularData& data,
                                    double t_end, double tol, double epsilon = 0.0);

/// Bryant-Salamon closed form: a = b = (sqrt3/2) r^2,
/// adot = bdot = (sqrt3/2) r (c + r^2)^(1/6); t is left at zero.
State bsClosedForm(double r, double c);
/// The reparametrization dr/dt = (1/2) (c + r^2)^(1/6).
double bsDrDt(double r, double c);
/// Arc length t(r) = integral of 2 (c + s^2)^(-1/6) ds from 0 to r.
double bsArcLength(double r, double c);
/// Parameters of the Bryant-Salamon presentation: c1 = -(3/8) sqrt3 c, c2 = 0.
Params bsParams(double c);

/// Invariant coframe basis order: index 0 = dt, 1..3 = e_i, 4..6 = f_i.
/// de_i = 2 e_j ^ e_k and df_i = 2 f_j ^ f_k.
inline constexpr int kDt = 0;
inline constexpr int kE1 = 1;
inline constexpr int kF1 = 4;

/// phi = -8 c1 e123 - 8 c2 f123 + 4 d(a1 e1 f1 + a2 e2 f2 + a3 e3 f3),
/// expanded through the structure equations.
AlternatingForm assemblePhi(const State& state, const Params& params);
AlternatingForm assemblePhi(const Solution& solution, double t);

/// The dual 4-form in the invariant coframe. Note: the coefficients follow
/// the interleaved orientation dt^e1^f1^e2^f2^e3^f3, i.e. the negative of the
/// Hodge dual taken in the block coframe order above.
AlternatingForm assembleStarPhi(const State& state, const Params& params);
AlternatingForm assembleStarPhi(const Solution& solution, double t);

/// Exterior derivative on the invariant coframe: structure-equation terms
/// plus dt ^ (central finite difference of the coefficients in t).
AlternatingForm coframeExteriorDerivative(const AlternatingForm& at_t,
                                          const AlternatingForm& at_t_minus_h,
                                          const AlternatingForm& at_t_plus_h, double h);

/// (||d phi||, ||d *phi||) at time t with finite-difference half-width h.
/// Both are O(h^2) along torsion-free trajectories.
std::pair<double, double> closednessResidual(const Solution& solution, double t, double h);

/// Same residuals for a trajectory whose a-coefficient is shifted by delta_a
/// (a non-solution probe; the d *phi residual is bounded away from zero).
std::pair<double, double> closednessResidualPerturbed(const Solution& solution, double t,
                                                      double h, double delta_a);

}  // namespace g2cal::fhn
