#include "g2cal/moments.hpp"

#include <cmath>

namespace g2cal::moments {

namespace {

const Eigen::Vector3d kI{1, 0, 0};

void requireUnit(const Quaternion& q, const char* who) {
  if (std::abs(q.norm() - 1.0) > 1e-9) throw NonUnitError(who);
}

Eigen::Vector3d basisVec(int i) {
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e(i) = 1.0;
  return e;
}

}  // namespace

HopfPair hopfPair(const Quaternion& p, const Quaternion& q) {
  requireUnit(p, "hopfPair: p not unit");
  requireUnit(q, "hopfPair: q not unit");
  HopfPair pair;
  pair.v = q.rotate(p.conj().rotate(kI));
  pair.w = q.rotate(kI);
  return pair;
}

KillingFrame killingFrame(const Quaternion& p, const Quaternion& q) {
  requireUnit(p, "killingFrame: p not unit");
  requireUnit(q, "killingFrame: q not unit");
  const Eigen::Vector3d h = p.conj().rotate(kI);
  KillingFrame frame;
  frame.U1.setZero();
  frame.U2.setZero();
  for (int m = 0; m < 3; ++m) frame.U1(fhn::kE1 + m) = -h(m);
  frame.U2(fhn::kE1) = 1.0;
  frame.U2(fhn::kF1) = 1.0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d gi = q.conj().rotate(basisVec(i));
    frame.V[i].setZero();
    for (int m = 0; m < 3; ++m) frame.V[i](fhn::kF1 + m) = 0.5 * gi(m);
  }
  return frame;
}

MomentValues momentValues(const HopfPair& pair, const fhn::State& s,
                          const fhn::Params& params) {
  MomentValues out;
  const double vw = pair.v.dot(pair.w);
  out.nu = -4.0 * (s.b - params.c1) * vw;
  out.mu = -4.0 * s.adot() * s.bdot() * pair.v.cross(pair.w);
  out.theta1 = 2.0 * s.a * pair.v - 2.0 * (s.a - s.b) * vw * pair.w;
  out.theta2 = -2.0 * (s.b + params.c2) * pair.w;
  out.eta = 0.0;
  return out;
}

MomentValues momentValues(const HopfPair& pair, const fhn::Solution& solution, double t) {
  MomentValues out = momentValues(pair, solution.at(t), solution.params());
  out.eta = solution.etaIntegral(t);
  return out;
}

HopfPair bsHopfPair(BsCase which, const Quaternion& p, const Quaternion& q) {
  requireUnit(p, "bsHopfPair: p not unit");
  requireUnit(q, "bsHopfPair: q not unit");
  HopfPair pair;
  switch (which) {
    case BsCase::kCase0:
      pair.v = p.conj().rotate(kI);
      pair.w = q.conj().rotate(kI);
      break;
    case BsCase::kCase1:
      return hopfPair(p, q);
    case BsCase::kCase2:
      pair.v = p.rotate(kI);
      pair.w = p.rotate(q.conj().rotate(kI));
      break;
  }
  return pair;
}

MomentValues bsMomentValues(BsCase which, const HopfPair& pair, double r, double c) {
  const double sqrt3 = std::sqrt(3.0);
  const double r2 = r * r;
  const double vw = pair.v.dot(pair.w);
  const Eigen::Vector3d vxw = pair.v.cross(pair.w);
  const double mu_scale = 3.0 * r2 * std::cbrt(c + r2);

  MomentValues out;
  out.theta2 = -sqrt3 * r2 * pair.w;
  switch (which) {
    case BsCase::kCase0:
      out.nu = 2.0 * sqrt3 * r2 * vw;
      out.theta1 = sqrt3 / 4.0 * (3.0 * c + 4.0 * r2) * pair.v;
      out.mu = -mu_scale * vxw;
      break;
    case BsCase::kCase1:
      out.nu = -sqrt3 / 2.0 * (3.0 * c + 4.0 * r2) * vw;
      out.theta1 = sqrt3 * r2 * pair.v;
      out.mu = -mu_scale * vxw;
      break;
    case BsCase::kCase2:
      out.nu = -2.0 * sqrt3 * r2 * vw;
      out.theta1 = sqrt3 / 4.0 * (3.0 * c + 4.0 * r2) * pair.v;
      out.mu = mu_scale * vxw;
      break;
  }
  return out;
}

namespace {

struct GroupPoint {
  Quaternion p, q;
  double t;
};

/// First-order flow with velocity X (frame coordinates) for time s:
/// p -> p exp(-X_E s), q -> q exp(-X_F s), t -> t + X_dt s.
GroupPoint flow(const Quaternion& p, const Quaternion& q, double t, const Vector7& X,
                double s) {
  GroupPoint g{p, q, t + X(fhn::kDt) * s};
  const Eigen::Vector3d xe{X(fhn::kE1), X(fhn::kE1 + 1), X(fhn::kE1 + 2)};
  const Eigen::Vector3d xf{X(fhn::kF1), X(fhn::kF1 + 1), X(fhn::kF1 + 2)};
  if (xe.norm() > 0) g.p = p * Quaternion::expImag(-xe * s);
  if (xf.norm() > 0) g.q = q * Quaternion::expImag(-xf * s);
  return g;
}

Eigen::VectorXd toDyn(const Vector7& v) { return v; }

}  // namespace

double gradientIdentityResidual(GradientIdentity which, const Quaternion& p,
                                const Quaternion& q, const fhn::Solution& solution, double t,
                                double h) {
  const fhn::Params& params = solution.params();
  const KillingFrame frame = killingFrame(p, q);
  const AlternatingForm phi = fhn::assemblePhi(solution, t);
  const AlternatingForm star_phi = fhn::assembleStarPhi(solution, t);

  auto moment_at = [&](const GroupPoint& g) {
    return momentValues(hopfPair(g.p, g.q), solution.at(g.t), params);
  };

  double worst = 0.0;
  if (which == GradientIdentity::kThetaAlternative) {
    const MomentValues m = momentValues(hopfPair(p, q), solution.at(t), params);
    for (int l = 0; l < 2; ++l) {
      const Vector7& U = l == 0 ? frame.U1 : frame.U2;
      const Eigen::Vector3d& theta = l == 0 ? m.theta1 : m.theta2;
      for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3, j = (k + 2) % 3;
        std::array<Eigen::VectorXd, 3> vecs{toDyn(U), toDyn(frame.V[i]), toDyn(frame.V[j])};
        const double contraction = phi({vecs.data(), 3});
        worst = std::max(worst,
                         std::abs(theta(k) - contraction) / std::max(1.0, std::abs(theta(k))));
      }
    }
    return worst;
  }

  for (int dir = 0; dir < 7; ++dir) {
    Vector7 X = Vector7::Zero();
    X(dir) = 1.0;
    const MomentValues plus = moment_at(flow(p, q, t, X, h));
    const MomentValues minus = moment_at(flow(p, q, t, X, -h));
    if (which == GradientIdentity::kNu) {
      const double fd = (plus.nu - minus.nu) / (2.0 * h);
      std::array<Eigen::VectorXd, 3> vecs{toDyn(frame.U1), toDyn(frame.U2), toDyn(X)};
      worst = std::max(worst, std::abs(fd - phi({vecs.data(), 3})));
    } else {
      for (int i = 0; i < 3; ++i) {
        const double fd = (plus.mu(i) - minus.mu(i)) / (2.0 * h);
        std::array<Eigen::VectorXd, 4> vecs{toDyn(frame.U1), toDyn(frame.U2),
                                            toDyn(frame.V[i]), toDyn(X)};
        worst = std::max(worst, std::abs(fd - star_phi({vecs.data(), 4})));
      }
    }
  }
  return worst;
}

double muDerivativeAlongAssociative(const Quaternion& p, const Quaternion& q,
                                    const fhn::Solution& solution, double t, double h) {
  const fhn::Params& params = solution.params();
  const KillingFrame frame = killingFrame(p, q);
  const AlternatingForm phi = fhn::assemblePhi(solution, t);
  const Metric7 metric = metricFromPhi(phi);
  const Vector7 direction = crossProduct(frame.U1, frame.U2, phi, metric);
  if (direction.norm() < 1e-12) throw SingularPointError("U1 x U2 vanishes");

  auto mu_at = [&](double s) {
    const GroupPoint g = flow(p, q, t, direction, s);
    return momentValues(hopfPair(g.p, g.q), solution.at(g.t), params).mu;
  };
  const Eigen::Vector3d d =
      (-mu_at(2 * h) + 8.0 * mu_at(h) - 8.0 * mu_at(-h) + mu_at(-2 * h)) / (12.0 * h);
  return d.cwiseAbs().maxCoeff();
}

Eigen::Vector3d muContractionFormula(const Quaternion& p, const Quaternion& q,
                                     const fhn::State& state, const fhn::Params& params) {
  const KillingFrame frame = killingFrame(p, q);
  const AlternatingForm star_phi = fhn::assembleStarPhi(state, params);
  Eigen::Vector3d mu;
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    std::array<Eigen::VectorXd, 4> vecs{toDyn(frame.U1), toDyn(frame.U2), toDyn(frame.V[i]),
                                        toDyn(frame.V[j])};
    mu(k) = -star_phi({vecs.data(), 4});
  }
  return mu;
}

double su2CoassocObstruction(const fhn::Solution& solution) {
  const Quaternion p{0.3, -0.5, 0.6, std::sqrt(1 - 0.09 - 0.25 - 0.36)};
  const Quaternion q{0.8, 0.1, -0.4, std::sqrt(1 - 0.64 - 0.01 - 0.16)};
  const KillingFrame frame = killingFrame(p, q);

  double first = 0.0;
  const int samples = 20;
  for (int s = 0; s < samples; ++s) {
    const double t = solution.tBegin() +
                     (solution.tEnd() - solution.tBegin()) * (s + 0.5) / samples;
    const AlternatingForm phi = fhn::assemblePhi(solution, t);
    std::array<Eigen::VectorXd, 3> vecs{toDyn(frame.V[0]), toDyn(frame.V[1]),
                                        toDyn(frame.V[2])};
    // The moment tables orient the V-triple oppositely to the bracket
    // normalization; negate to report their constant.
    const double value = -phi({vecs.data(), 3});
    if (s == 0)
      first = value;
    else if (std::abs(value - first) > 1e-9 * std::max(1.0, std::abs(first)))
      throw SingularPointError("su2CoassocObstruction: phi(V1,V2,V3) not constant");
  }
  return first;
}

double quotientThetaMetric(const fhn::Solution& solution, double theta, double t) {
  // Realize the angle with q = 1, p = exp(k theta / 2): then w = (1,0,0) and
  // v = (cos theta, -sin theta, 0).
  const Quaternion p = Quaternion::expImag(Eigen::Vector3d{0, 0, theta / 2});
  const Quaternion q = Quaternion::identity();

  // Coordinate lift of d/d theta: pdot = (k/2) p, i.e. -(1/2) sum (pbar k p)_m E_m.
  const Eigen::Vector3d pkp = p.conj().rotate(Eigen::Vector3d{0, 0, 1});
  Vector7 lift = Vector7::Zero();
  for (int m = 0; m < 3; ++m) lift(fhn::kE1 + m) = -0.5 * pkp(m);

  const KillingFrame frame = killingFrame(p, q);
  const AlternatingForm phi = fhn::assemblePhi(solution, t);
  const Metric7 metric = metricFromPhi(phi);

  // Project out the orbit directions in the 7-metric.
  Eigen::Matrix<double, 7, 5> K;
  K.col(0) = frame.U1;
  K.col(1) = frame.U2;
  for (int i = 0; i < 3; ++i) K.col(2 + i) = frame.V[i];
  const Eigen::MatrixXd gram = K.transpose() * metric.g * K;
  const Eigen::VectorXd rhs = K.transpose() * metric.g * lift;
  const Eigen::VectorXd coeff = gram.ldlt().solve(rhs);
  const Vector7 horizontal = lift - K * coeff;
  return horizontal.dot(metric.g * horizontal);
}

}  // namespace g2cal::moments
