#include "g2cal/trisymplectic.hpp"

#include <algorithm>
#include <cmath>

namespace g2cal::trisym {

namespace {

constexpr double kDetTol = 1e-14;

Eigen::Matrix3d adjugate(const Eigen::Matrix3d& m) {
  Eigen::Matrix3d adj;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
      const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      // adj(m)_{ji} = cofactor_{ij}
      adj(j, i) = m(i1, j1) * m(i2, j2) - m(i1, j2) * m(i2, j1);
    }
  }
  return adj;
}

}  // namespace

TMatrixPath::TMatrixPath(Fn value, Fn derivative)
    : value_(std::move(value)), derivative_(std::move(derivative)) {}

TMatrixPath TMatrixPath::identity() {
  return TMatrixPath([](double) { return Eigen::Matrix2d::Identity(); },
                     [](double) { return Eigen::Matrix2d::Zero(); });
}

TMatrixPath TMatrixPath::scaled(double c0, double c1) {
  return TMatrixPath(
      [c0, c1](double R) { return (c0 + c1 * R) * Eigen::Matrix2d::Identity(); },
      [c1](double) { return c1 * Eigen::Matrix2d::Identity(); });
}

Eigen::Matrix3d TMatrixPath::padded(double R) const {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m.block<2, 2>(1, 1) = value_(R);
  return m;
}

Eigen::Matrix3d TMatrixPath::paddedDerivative(double R) const {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m.block<2, 2>(1, 1) = derivative_(R);
  return m;
}

Eigen::Matrix3d tauRhs(const TauState& state, const TMatrixPath& T) {
  if (std::abs(state.tau.determinant()) < kDetTol)
    throw SingularTauError("tauRhs: det tau below tolerance");
  const Eigen::Matrix3d Tm = T.padded(state.R);
  const Eigen::Matrix3d dT = T.paddedDerivative(state.R);
  return dT * Tm.inverse() * state.tau + state.tau.transpose().inverse();
}

TauSolution::TauSolution(std::vector<ode::Sample> samples, TauTermination termination,
                         double singular_R)
    : samples_(std::move(samples)), termination_(termination), singular_R_(singular_R) {}

Eigen::Matrix3d TauSolution::at(double R) const {
  const bool forward = samples_.back().t >= samples_.front().t;
  const double lo = rBegin(), hi = rEnd();
  if (R < lo - 1e-12 * std::max(1.0, std::abs(lo)) ||
      R > hi + 1e-12 * std::max(1.0, std::abs(hi)))
    throw OutOfDomainError("TauSolution::at: R outside trajectory");
  R = std::clamp(R, lo, hi);
  std::size_t hi_idx = 1;
  if (forward) {
    while (hi_idx + 1 < samples_.size() && samples_[hi_idx].t < R) ++hi_idx;
  } else {
    while (hi_idx + 1 < samples_.size() && samples_[hi_idx].t > R) ++hi_idx;
  }
  const ode::State y = ode::hermite(samples_[hi_idx - 1], samples_[hi_idx], R);
  return Eigen::Map<const Eigen::Matrix3d>(y.data()).transpose();
}

TauSolution integrateTau(const TMatrixPath& T, const Eigen::Matrix3d& tau0, double R0,
                         double R1, double tol) {
  if (std::abs(tau0.determinant()) < kDetTol)
    throw SingularTauError("integrateTau: tau0 is singular");

  auto unpack = [](const ode::State& y) {
    return Eigen::Matrix3d(Eigen::Map<const Eigen::Matrix3d>(y.data()).transpose());
  };
  ode::Rhs rhs = [&T, &unpack](double R, const ode::State& y) -> ode::State {
    const Eigen::Matrix3d tau = unpack(y);
    if (std::abs(tau.determinant()) < kDetTol)
      throw std::domain_error("integrateTau: singular stage");
    const Eigen::Matrix3d d = tauRhs({R, tau}, T);
    ode::State out(9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[3 * i + j] = d(i, j);
    return out;
  };
  ode::Options opts;
  opts.rel_tol = tol;
  opts.abs_tol = tol * 1e-2;
  opts.initial_step = std::abs(R1 - R0) / 1000.0;
  // keep steps moderate so the Hermite dense output matches the tolerance
  opts.max_step = std::abs(R1 - R0) / 1000.0;
  opts.event = [&unpack](double, const ode::State& y) {
    return std::abs(unpack(y).determinant()) - kDetTol * 10.0;
  };

  ode::State y0(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) y0[3 * i + j] = tau0(i, j);

  ode::Result r = ode::integrate(rhs, R0, y0, R1, opts);
  TauTermination term = TauTermination::kReachedEnd;
  double singular_R = 0.0;
  if (r.termination == ode::Termination::kEvent) {
    term = TauTermination::kSingularTau;
    singular_R = r.event_time;
  } else if (r.termination == ode::Termination::kStepFailure) {
    // step collapse next to det tau = 0 counts as the singular truncation
    term = TauTermination::kSingularTau;
    singular_R = r.samples.back().t;
  }
  return TauSolution(std::move(r.samples), term, singular_R);
}

Eigen::Matrix3d etaFromTau(const Eigen::Matrix3d& tau) {
  const double det = tau.determinant();
  if (det <= 0.0) throw NonPositiveDetError("etaFromTau: det tau must be positive");
  return adjugate(tau.transpose()) / std::sqrt(det);
}

Eigen::Matrix3d metricFromTau(const Eigen::Matrix3d& tau) {
  const Eigen::Matrix3d eta = etaFromTau(tau);
  return eta.transpose() * eta;
}

namespace {

AlternatingForm covector4(int i) { return AlternatingForm::covector(4, i); }

AlternatingForm deltaBar(int j) {
  // delta_bar_j = delta_k ^ delta_l, (j, k, l) cyclic in (1, 2, 3)
  const int k = (j % 3) + 1, l = ((j + 1) % 3) + 1;
  return wedge(covector4(k), covector4(l));
}

/// sigma rows as coefficient matrices: row i of B multiplies delta_0 ^
/// delta_j, row i of C multiplies delta_bar_j.
struct SigmaCoefficients {
  Eigen::Matrix3d B;  // (1/det eta) eta = (tau^T)^{-1}
  Eigen::Matrix3d C;  // tau
};

SigmaCoefficients sigmaCoefficients(const Eigen::Matrix3d& tau) {
  SigmaCoefficients s;
  const Eigen::Matrix3d eta = etaFromTau(tau);
  s.B = eta / eta.determinant();
  s.C = tau;
  return s;
}

AlternatingForm buildTwoForm(const Eigen::RowVector3d& b_row, const Eigen::RowVector3d& c_row) {
  AlternatingForm form(4, 2);
  for (int j = 0; j < 3; ++j) {
    form += b_row(j) * wedge(covector4(0), covector4(1 + j));
    form += c_row(j) * deltaBar(1 + j);
  }
  return form;
}

/// d of a 2-form with coefficient rows (b_row, c_row) at fixed R:
/// structure-equation part plus delta_0 ^ (R-derivative part), with the
/// spatial cross-product terms of equivariant rows included when
/// `equivariant` is set (invariant rows have none).
AlternatingForm twoFormDerivative(const Eigen::RowVector3d& b_row,
                                  const Eigen::RowVector3d& c_row,
                                  const Eigen::RowVector3d& b_dot,
                                  const Eigen::RowVector3d& c_dot, bool equivariant) {
  AlternatingForm d(4, 3);
  // R-derivative: b_dot dies against delta_0 ^ delta_0; c_dot survives.
  for (int j = 0; j < 3; ++j) d += c_dot(j) * wedge(covector4(0), deltaBar(1 + j));
  (void)b_dot;
  // structure terms: d(delta_0 ^ delta_j) = +delta_0 ^ delta_bar_j,
  // d(delta_bar_j) = 0.
  for (int j = 0; j < 3; ++j) d += b_row(j) * wedge(covector4(0), deltaBar(1 + j));
  if (equivariant) {
    // spatial part of the rows: d f_j = eps_{jkl} f_k delta_l (mod delta_0)
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
          if (j == k || k == l || j == l) continue;
          const int sign = ((j + 1) % 3 == k) ? 1 : -1;  // eps_{jkl}
          d += sign * b_row(k) * wedge(covector4(1 + l), wedge(covector4(0), covector4(1 + j)));
          d += sign * c_row(k) * wedge(covector4(1 + l), deltaBar(1 + j));
        }
      }
    }
  }
  return d;
}

}  // namespace

CoherentTriple reconstructTriple(const TauState& state, const TMatrixPath& T) {
  const SigmaCoefficients co = sigmaCoefficients(state.tau);
  const Eigen::Matrix3d Ti = T.padded(state.R).inverse();
  const Eigen::Matrix3d Bbar = Ti * co.B;
  const Eigen::Matrix3d Cbar = Ti * co.C;

  CoherentTriple triple{{AlternatingForm(4, 2), AlternatingForm(4, 2), AlternatingForm(4, 2)},
                        {AlternatingForm(4, 2), AlternatingForm(4, 2), AlternatingForm(4, 2)},
                        Eigen::Matrix2d::Zero(),
                        0.0};
  for (int i = 0; i < 3; ++i) {
    triple.sigma[i] = buildTwoForm(co.B.row(i), co.C.row(i));
    triple.sigma_bar[i] = buildTwoForm(Bbar.row(i), Cbar.row(i));
  }
  const Eigen::Matrix2d Tb = T.block(state.R);
  triple.Q = (Tb * Tb).inverse();
  triple.vol = 0.5 * wedge(triple.sigma[0], triple.sigma[0]).coeff(0);
  return triple;
}

double closednessResidualTriple(const std::function<Eigen::Matrix3d(double)>& tau_path,
                                const TMatrixPath& T, int i, double R, double h) {
  auto coeffs = [&](double Rq) {
    const Eigen::Matrix3d Ti = T.padded(Rq).inverse();
    const SigmaCoefficients co = sigmaCoefficients(tau_path(Rq));
    return std::pair{Eigen::Matrix3d(Ti * co.B), Eigen::Matrix3d(Ti * co.C)};
  };
  const auto [B0, C0] = coeffs(R);
  const auto [Bp, Cp] = coeffs(R + h);
  const auto [Bm, Cm] = coeffs(R - h);
  const Eigen::Matrix3d Bd = (Bp - Bm) / (2.0 * h);
  const Eigen::Matrix3d Cd = (Cp - Cm) / (2.0 * h);
  const AlternatingForm d =
      twoFormDerivative(B0.row(i), C0.row(i), Bd.row(i), Cd.row(i), /*equivariant=*/true);
  return d.maxAbsCoeff();
}

double closednessResidualTriple(const TauSolution& trajectory, const TMatrixPath& T, int i,
                                double R, double h) {
  return closednessResidualTriple([&trajectory](double Rq) { return trajectory.at(Rq); }, T, i,
                                  R, h);
}

double sigmaMinusStructureResidual(const std::function<Eigen::Matrix3d(double)>& tau_path,
                                   const TMatrixPath& /*T*/, double R, double h) {
  // sigma - sigma^- = 2 (1/det eta) delta_0 ^ (eta delta): equivariant rows
  // for sigma, invariant rows for sigma^-; their d's agree row by row.
  auto coeffs = [&](double Rq) {
    const SigmaCoefficients co = sigmaCoefficients(tau_path(Rq));
    return std::pair{co.B, co.C};
  };
  const auto [B0, C0] = coeffs(R);
  const auto [Bp, Cp] = coeffs(R + h);
  const auto [Bm, Cm] = coeffs(R - h);
  const Eigen::Matrix3d Bd = (Bp - Bm) / (2.0 * h);
  const Eigen::Matrix3d Cd = (Cp - Cm) / (2.0 * h);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    const AlternatingForm d_sigma =
        twoFormDerivative(B0.row(i), C0.row(i), Bd.row(i), Cd.row(i), true);
    const AlternatingForm d_sigma_minus =
        twoFormDerivative(-B0.row(i), C0.row(i), -Bd.row(i), Cd.row(i), false);
    worst = std::max(worst, (d_sigma - d_sigma_minus).maxAbsCoeff());
  }
  return worst;
}

FPairResult constructFPair(const std::function<Eigen::Matrix3d(double)>& tau_path,
                           const TMatrixPath& T,
                           const std::function<Eigen::Matrix<double, 3, 2>(double)>& a,
                           double R, double h, std::optional<Eigen::Matrix2d> A) {
  // F+^(al) = sum_i a_{i,al} sigma_i (equivariant coefficient rows),
  // F-^(al) = -sum_i a_{i,al} sigma^-_i (invariant rows).
  auto combined = [&](double Rq) {
    const SigmaCoefficients co = sigmaCoefficients(tau_path(Rq));
    const Eigen::Matrix<double, 2, 3> at = a(Rq).transpose();
    return std::pair{Eigen::Matrix<double, 2, 3>(at * co.B),
                     Eigen::Matrix<double, 2, 3>(at * co.C)};
  };
  const auto [B0, C0] = combined(R);
  const auto [Bp, Cp] = combined(R + h);
  const auto [Bm, Cm] = combined(R - h);
  const Eigen::Matrix<double, 2, 3> Bd = (Bp - Bm) / (2.0 * h);
  const Eigen::Matrix<double, 2, 3> Cd = (Cp - Cm) / (2.0 * h);

  FPairResult result{0.0, std::nullopt};
  for (int al = 0; al < 2; ++al) {
    const AlternatingForm d_plus =
        twoFormDerivative(B0.row(al), C0.row(al), Bd.row(al), Cd.row(al), true);
    // F- = -a sigma^-: rows (+a B, -a C) with the invariant rule
    const AlternatingForm d_minus =
        twoFormDerivative(B0.row(al), -C0.row(al), Bd.row(al), -Cd.row(al), false);
    result.closedness_residual =
        std::max(result.closedness_residual, (d_plus + d_minus).maxAbsCoeff());
  }
  if (A) {
    const Eigen::Matrix2d Tb = T.block(R);
    const Eigen::Matrix2d Q = (Tb * Tb).inverse();
    result.trace_condition = std::abs((*A * Q).trace());
  }
  return result;
}

}  // namespace g2cal::trisym
