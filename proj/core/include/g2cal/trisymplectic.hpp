#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "g2cal/exterior.hpp"
#include "g2cal/ode.hpp"

namespace g2cal::trisym {

struct SingularTauError : std::domain_error {
  using std::domain_error::domain_error;
};
struct NonPositiveDetError : std::domain_error {
  using std::domain_error::domain_error;
};
struct OutOfDomainError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Symmetric positive-definite 2x2 path R -> T(R) with analytic derivative,
/// padded to 3x3 with one in the (0,0) entry for the matrix ODE.
class TMatrixPath {
public:
  using Fn = std::function<Eigen::Matrix2d(double)>;

  TMatrixPath(Fn value, Fn derivative);
  static TMatrixPath identity();
  /// T(R) = (c0 + c1 R) * Id_2.
  static TMatrixPath scaled(double c0, double c1);

  Eigen::Matrix2d block(double R) const { return value_(R); }
  Eigen::Matrix3d padded(double R) const;
  Eigen::Matrix3d paddedDerivative(double R) const;

private:
  Fn value_;
  Fn derivative_;
};

struct TauState {
  double R;
  Eigen::Matrix3d tau;
};

/// Right-hand side of the matrix ODE
///   dtau/dR = (dT/dR) T^{-1} tau + (tau^T)^{-1}.
/// Throws SingularTauError when |det tau| < 1e-14.
Eigen::Matrix3d tauRhs(const TauState& state, const TMatrixPath& T);

enum class TauTermination { kReachedEnd, kSingularTau };

/// Integrated tau trajectory with dense output.
class TauSolution {
public:
  TauSolution(std::vector<ode::Sample> samples, TauTermination termination,
              double singular_R);

  double rBegin() const { return std::min(samples_.front().t, samples_.back().t); }
  double rEnd() const { return std::max(samples_.front().t, samples_.back().t); }
  TauTermination termination() const { return termination_; }
  double singularR() const { return singular_R_; }
  const std::vector<ode::Sample>& samples() const { return samples_; }

  Eigen::Matrix3d at(double R) const;

private:
  std::vector<ode::Sample> samples_;
  TauTermination termination_;
  double singular_R_;
};

/// Adaptive integration of the tau ODE over [R0, R1] (either direction);
/// det tau is tracked and the trajectory is truncated at SingularTau.
TauSolution integrateTau(const TMatrixPath& T, const Eigen::Matrix3d& tau0, double R0,
                         double R1, double tol = 1e-10);

/// eta = adj(tau^T) / sqrt(det tau): the positive branch of tau = adj(eta^T).
/// Throws NonPositiveDetError for det tau <= 0.
Eigen::Matrix3d etaFromTau(const Eigen::Matrix3d& tau);

/// ghat = eta^T eta, the metric coefficients on the invariant coframe.
Eigen::Matrix3d metricFromTau(const Eigen::Matrix3d& tau);

/// Coframe basis order: index 0 = delta_0 = dR, 1..3 = delta_i with
/// d delta_i = -delta_j ^ delta_k.
struct CoherentTriple {
  std::array<AlternatingForm, 3> sigma;      // orthogonalized sigma_0..2
  std::array<AlternatingForm, 3> sigma_bar;  // T^{-1} sigma
  Eigen::Matrix2d Q;                         // = T^{-2} block
  double vol;                                // coefficient of d0^d1^d2^d3
};

/// sigma = (1/det eta) delta_0 ^ (eta delta) + tau delta_bar, then
/// sigma_bar = T^{-1} sigma; Q = T^{-2}.
CoherentTriple reconstructTriple(const TauState& state, const TMatrixPath& T);

/// ||d sigma_bar_i|| at R, with the structure-equation terms of the
/// SU(2)-equivariant coefficient rows and a central finite difference in R.
/// O(h^2) along solutions of the tau ODE.
double closednessResidualTriple(const TauSolution& trajectory, const TMatrixPath& T, int i,
                                double R, double h);
/// Same residual with tau replaced by an arbitrary matrix path (probe for
/// non-solutions).
double closednessResidualTriple(const std::function<Eigen::Matrix3d(double)>& tau_path,
                                const TMatrixPath& T, int i, double R, double h);

/// ||d(sigma - sigma^-)|| where sigma^- is the anti-self-dual companion
/// (invariant coefficients, alpha_0-part negated); vanishes identically.
double sigmaMinusStructureResidual(const std::function<Eigen::Matrix3d(double)>& tau_path,
                                   const TMatrixPath& T, double R, double h);

struct FPairResult {
  double closedness_residual;            // ||d(F+ + F-)||
  std::optional<double> trace_condition; // |Tr(A Q)| when A is supplied
};

/// F+ = a sigma, F- = -a sigma^- for an invariant a: R -> R^{3x2}; reports
/// the closedness residual of F+ + F- and, when A is supplied, whether the
/// orthogonality trace condition Tr(A Q) = 0 holds.
FPairResult constructFPair(const std::function<Eigen::Matrix3d(double)>& tau_path,
                           const TMatrixPath& T,
                           const std::function<Eigen::Matrix<double, 3, 2>(double)>& a,
                           double R, double h,
                           std::optional<Eigen::Matrix2d> A = std::nullopt);

}  // namespace g2cal::trisym
