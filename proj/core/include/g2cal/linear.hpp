#pragma once

#include <stdexcept>

#include <Eigen/Dense>

#include "g2cal/exterior.hpp"

namespace g2cal {

/// Basis order (x1, x2, x3, a0, a1, a2, a3): indices 0..2 are the R^3 factor,
/// 3..6 the R^4 factor. This order is positively oriented.
using Vector7 = Eigen::Matrix<double, 7, 1>;
using Matrix7 = Eigen::Matrix<double, 7, 7>;

struct NotPositiveError : std::domain_error {
  using std::domain_error::domain_error;
};
struct DegenerateSpanError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Metric induced by a positive 3-form, together with the coefficient of the
/// induced volume 7-form on e^{0...6}. The scale is negative when the induced
/// orientation is opposite to the coordinate order.
struct Metric7 {
  Matrix7 g;
  double volume_scale = 1.0;
};

/// The standard associative 3-form: dx1^dx2^dx3 + sum_i dx_i ^ Omega_i with
/// Omega_i = da0^da_i - da_j^da_k, (i,j,k) cyclic.
AlternatingForm standardPhi0();

/// Its Hodge dual da0^da1^da2^da3 - sum_i dx_j^dx_k^Omega_i.
AlternatingForm standardStarPhi0();

/// Metric and volume coefficient from (u -| phi)^(v -| phi)^phi = -6 g(u,v) vol.
/// Normalization: g = det(B)^(-1/9) B, volume_scale = det(B)^(1/9) with
/// B(u,v) = -(1/6) * [coefficient of the 7-form against e^{0..6}].
/// Throws NotPositiveError when B is not definite (phi is not a G2 form).
Metric7 metricFromPhi(const AlternatingForm& phi);

/// Cross product (v -| u -| phi)^sharp, so that g(u x v, w) = phi(u, v, w).
Vector7 crossProduct(const Vector7& u, const Vector7& v, const AlternatingForm& phi,
                     const Metric7& metric);

enum class Calibration { kCalibratedPlus, kCalibratedMinus, kNotCalibrated };

struct CalibrationResult {
  Calibration status;
  double residual;  // norm of the obstruction over the g-volume of the span
};

/// Associative test for span(u,v,w): the contraction of *phi with the triple
/// must vanish; the sign comes from phi(u,v,w).
CalibrationResult isAssociativePlane(const Vector7& u, const Vector7& v, const Vector7& w,
                                     const AlternatingForm& phi,
                                     const AlternatingForm& star_phi, const Metric7& metric,
                                     double tol = 1e-9);

/// Coassociative test for span(u,v,w,z): phi restricted to the span must
/// vanish; the sign comes from *phi(u,v,w,z).
CalibrationResult isCoassociativePlane(const Vector7& u, const Vector7& v, const Vector7& w,
                                       const Vector7& z, const AlternatingForm& phi,
                                       const AlternatingForm& star_phi, const Metric7& metric,
                                       double tol = 1e-9);

}  // namespace g2cal
