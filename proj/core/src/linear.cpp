#include "g2cal/linear.hpp"

#include <cmath>

namespace g2cal {

namespace {

// (i, j, k) cyclic in (1, 2, 3), quaternion-compatible.
constexpr int kCyc[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};

Eigen::VectorXd toDyn(const Vector7& v) { return v; }

}  // namespace

AlternatingForm standardPhi0() {
  AlternatingForm phi(7, 3);
  phi.add(std::array{0, 1, 2}, 1.0);
  for (const auto& [i, j, k] : kCyc) {
    // dx_i ^ Omega_i, Omega_i = da0^da_i - da_j^da_k
    phi.add(std::array{i, 3, 4 + i}, 1.0);
    phi.add(std::array{i, 4 + j, 4 + k}, -1.0);
  }
  return phi;
}

AlternatingForm standardStarPhi0() {
  AlternatingForm sp(7, 4);
  sp.add(std::array{3, 4, 5, 6}, 1.0);
  for (const auto& [i, j, k] : kCyc) {
    // -dx_j ^ dx_k ^ Omega_i
    sp.add(std::array{j, k, 3, 4 + i}, -1.0);
    sp.add(std::array{j, k, 4 + j, 4 + k}, 1.0);
  }
  return sp;
}

Metric7 metricFromPhi(const AlternatingForm& phi) {
  Matrix7 b;
  std::vector<AlternatingForm> contractions;
  contractions.reserve(7);
  for (int u = 0; u < 7; ++u) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(7);
    e(u) = 1.0;
    contractions.push_back(contract(phi, e));
  }
  for (int u = 0; u < 7; ++u) {
    for (int v = u; v < 7; ++v) {
      const AlternatingForm seven = wedge(wedge(contractions[u], contractions[v]), phi);
      b(u, v) = b(v, u) = -seven.coeff(0) / 6.0;
    }
  }
  const double det = b.determinant();
  if (std::abs(det) < 1e-300) throw NotPositiveError("metricFromPhi: degenerate form");
  const double scale = std::copysign(std::pow(std::abs(det), 1.0 / 9.0), det);
  Metric7 metric;
  metric.g = b / scale;
  metric.volume_scale = scale;
  Eigen::SelfAdjointEigenSolver<Matrix7> es(metric.g);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NotPositiveError("metricFromPhi: bilinear form is not definite");
  return metric;
}

Vector7 crossProduct(const Vector7& u, const Vector7& v, const AlternatingForm& phi,
                     const Metric7& metric) {
  const AlternatingForm one_form = contract(contract(phi, toDyn(u)), toDyn(v));
  Vector7 flat;
  for (int i = 0; i < 7; ++i) flat(i) = one_form.coeff(i);
  return metric.g.ldlt().solve(flat);
}

namespace {

double gramVolume(const std::vector<Vector7>& span, const Metric7& metric) {
  const int k = static_cast<int>(span.size());
  Eigen::MatrixXd gram(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) gram(a, b) = span[a].dot(metric.g * span[b]);
  return gram.determinant();
}

}  // namespace

CalibrationResult isAssociativePlane(const Vector7& u, const Vector7& v, const Vector7& w,
                                     const AlternatingForm& phi,
                                     const AlternatingForm& star_phi, const Metric7& metric,
                                     double tol) {
  const double gram = gramVolume({u, v, w}, metric);
  if (gram < 1e-24) throw DegenerateSpanError("isAssociativePlane: degenerate triple");
  const double vol = std::sqrt(gram);

  AlternatingForm obstruction = contract(contract(contract(star_phi, toDyn(u)), toDyn(v)), toDyn(w));
  Vector7 flat;
  for (int i = 0; i < 7; ++i) flat(i) = obstruction.coeff(i);
  const double norm = std::sqrt(flat.dot(metric.g.ldlt().solve(flat)));
  const double residual = norm / vol;

  std::array<Eigen::VectorXd, 3> vecs{toDyn(u), toDyn(v), toDyn(w)};
  const double value = phi({vecs.data(), 3});
  CalibrationResult result{Calibration::kNotCalibrated, residual};
  if (residual <= tol)
    result.status = value >= 0.0 ? Calibration::kCalibratedPlus : Calibration::kCalibratedMinus;
  return result;
}

CalibrationResult isCoassociativePlane(const Vector7& u, const Vector7& v, const Vector7& w,
                                       const Vector7& z, const AlternatingForm& phi,
                                       const AlternatingForm& star_phi, const Metric7& metric,
                                       double tol) {
  const double gram = gramVolume({u, v, w, z}, metric);
  if (gram < 1e-24) throw DegenerateSpanError("isCoassociativePlane: degenerate quadruple");
  const double vol = std::sqrt(gram);

  // phi restricted to the span vanishes iff it kills all four basis triples.
  const std::array<Eigen::VectorXd, 4> vecs{toDyn(u), toDyn(v), toDyn(w), toDyn(z)};
  double sq = 0.0;
  for (int skip = 0; skip < 4; ++skip) {
    std::array<Eigen::VectorXd, 3> triple{vecs[skip == 0 ? 1 : 0], vecs[skip <= 1 ? 2 : 1],
                                          vecs[skip <= 2 ? 3 : 2]};
    const double val = phi({triple.data(), 3});
    sq += val * val;
  }
  const double residual = std::sqrt(sq) / vol;

  const double value = star_phi({vecs.data(), 4});
  CalibrationResult result{Calibration::kNotCalibrated, residual};
  if (residual <= tol)
    result.status = value >= 0.0 ? Calibration::kCalibratedPlus : Calibration::kCalibratedMinus;
  return result;
}

}  // namespace g2cal
