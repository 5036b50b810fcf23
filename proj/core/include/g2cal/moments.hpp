#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "g2cal/fhn.hpp"
#include "g2cal/linear.hpp"
#include "g2cal/quaternion.hpp"

namespace g2cal::moments {

struct NonUnitError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SingularPointError : std::domain_error {
  using std::domain_error::domain_error;
};

/// (v, w) = (q pbar i p qbar, q i qbar) in S^2 x S^2.
struct HopfPair {
  Eigen::Vector3d v;
  Eigen::Vector3d w;
  double cosTheta() const { return v.dot(w); }
};

HopfPair hopfPair(const Quaternion& p, const Quaternion& q);

/// Generators of the torus and SU(2) factors on the left-invariant frame
/// (E_1, E_2, E_3, F_1, F_2, F_3), stored as 7-vectors over the coframe
/// basis (dt, e, f) with vanishing dt-component:
///   U1 = -sum h_m E_m  (h = pbar i p), U2 = E_1 + F_1,
///   V_i = (1/2) sum g_{i,m} F_m       (g_i = qbar e_i q),
/// satisfying [U_l, U_m] = 0, [U_l, V_i] = 0, [V_i, V_j] = eps_{ijk} V_k.
struct KillingFrame {
  Vector7 U1, U2;
  std::array<Vector7, 3> V;
};

KillingFrame killingFrame(const Quaternion& p, const Quaternion& q);

struct MomentValues {
  double nu = 0.0;
  Eigen::Vector3d theta1 = Eigen::Vector3d::Zero();
  Eigen::Vector3d theta2 = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu = Eigen::Vector3d::Zero();
  double eta = 0.0;
};

/// Closed-form multi-moment maps of the enhanced FHN structure:
///   nu = -4 (b - c1) <v, w>,     mu = -4 adot bdot v x w,
///   theta1 = 2 a v - 2 (a - b) <v, w> w,   theta2 = -2 (b + c2) w,
///   eta = primitive of (2 b a^2 + c2 (b^2 + 2 a^2 + c1 c2)) / sqrt(-Lambda).
MomentValues momentValues(const HopfPair& pair, const fhn::Solution& solution, double t);
/// Same without the eta primitive (eta = 0); usable on a bare state.
MomentValues momentValues(const HopfPair& pair, const fhn::State& state,
                          const fhn::Params& params);

/// The three Bryant-Salamon actions of the S^3 x R^4 presentation.
enum class BsCase { kCase0, kCase1, kCase2 };

/// Hopf projection of each action: case 0 (v, w) = (pbar i p, qbar i q),
/// case 1 (q pbar i p qbar, q i qbar), case 2 (p i pbar, p qbar i q pbar).
HopfPair bsHopfPair(BsCase which, const Quaternion& p, const Quaternion& q);

/// Moment-map table of the Bryant-Salamon presentations; mu carries the
/// *phi-moment row (the table's theta^3). The table has no eta entry.
MomentValues bsMomentValues(BsCase which, const HopfPair& pair, double r, double c);

enum class GradientIdentity { kNu, kMu, kThetaAlternative };

/// Residual of the defining identities at ([p, q], t):
///  kNu: sup_X |d nu(X) - phi(U1, U2, X)| over the frame (dt, E, F),
///  kMu: sup_{i,X} |d mu_i(X) - *phi(U1, U2, V_i, X)|,
///  kThetaAlternative: max_{l,k} |theta^l_k - phi(U_l, V_i, V_j)| relative.
/// The derivatives are 3-point central differences along the frame flows.
double gradientIdentityResidual(GradientIdentity which, const Quaternion& p,
                                const Quaternion& q, const fhn::Solution& solution, double t,
                                double h);

/// Max over i of the 5-point finite-difference directional derivative of
/// mu_i along U1 x U2 (zero on T^2-invariant associatives).
double muDerivativeAlongAssociative(const Quaternion& p, const Quaternion& q,
                                    const fhn::Solution& solution, double t, double h);

/// mu_k = -*phi(U1, U2, V_i, V_j), (i, j, k) cyclic.
Eigen::Vector3d muContractionFormula(const Quaternion& p, const Quaternion& q,
                                     const fhn::State& state, const fhn::Params& params);

/// The constant phi(V_1, V_2, V_3) = c2 (triple oriented as in the moment
/// tables), sampled along the trajectory and verified constant to 1e-9.
/// SU(2)-invariant coassociatives exist iff it vanishes.
double su2CoassocObstruction(const fhn::Solution& solution);

/// |horizontal part of the theta-coordinate lift|^2 in the quotient metric
/// on B at (theta, t): the metric is dt^2 + G(theta, t) d theta^2.
double quotientThetaMetric(const fhn::Solution& solution, double theta, double t);

}  // namespace g2cal::moments
