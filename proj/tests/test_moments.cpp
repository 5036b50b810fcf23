#include <doctest.h>

#include <random>
#include <atomic>
#include <thread>

#include "g2cal/moments.hpp"

using namespace g2cal;
using namespace g2cal::moments;

namespace {

std::mt19937& rng() {
  static std::mt19937 gen(29);
  return gen;
}

Quaternion randomUnit() {
  std::normal_distribution<double> dist;
  Eigen::Vector4d v;
  for (int i = 0; i < 4; ++i) v(i) = dist(rng());
  v.normalize();
  return {v(0), v(1), v(2), v(3)};
}

const fhn::Solution& bsSolution() {
  static const fhn::Solution sol = fhn::integrateFromSingularOrbit(
      fhn::bsParams(1.0), {}, fhn::bsArcLength(4.0, 1.0), 1e-11);
  return sol;
}

}  // namespace

TEST_CASE("hopf pair examples") {
  const HopfPair id = hopfPair(Quaternion::identity(), Quaternion::identity());
  CHECK((id.v - Eigen::Vector3d(1, 0, 0)).norm() <= 1e-15);
  CHECK((id.w - Eigen::Vector3d(1, 0, 0)).norm() <= 1e-15);

  const HopfPair pj = hopfPair(Quaternion{0, 0, 1, 0}, Quaternion::identity());
  CHECK((pj.v - Eigen::Vector3d(-1, 0, 0)).norm() <= 1e-15);
  CHECK((pj.w - Eigen::Vector3d(1, 0, 0)).norm() <= 1e-15);

  CHECK_THROWS_AS(hopfPair(Quaternion{2, 0, 0, 0}, Quaternion::identity()), NonUnitError);
}

TEST_CASE("hopf pair equivariance under the group action") {
  // (lambda_1 p lambda_2^bar, gamma q lambda_2^bar) rotates (v, w) by R(gamma).
  std::uniform_real_distribution<double> angle(0.0, 6.28);
  for (int trial = 0; trial < 30; ++trial) {
    const Quaternion p = randomUnit(), q = randomUnit(), gamma = randomUnit();
    const Quaternion l1 = Quaternion::expImag({angle(rng()) / 2, 0, 0});
    const Quaternion l2 = Quaternion::expImag({angle(rng()) / 2, 0, 0});
    const HopfPair base = hopfPair(p, q);
    const HopfPair moved = hopfPair(l1 * p * l2.conj(), gamma * q * l2.conj());
    CHECK((moved.v - gamma.rotate(base.v)).norm() <= 1e-12);
    CHECK((moved.w - gamma.rotate(base.w)).norm() <= 1e-12);
  }
}

TEST_CASE("killing frame at the identity") {
  const KillingFrame frame = killingFrame(Quaternion::identity(), Quaternion::identity());
  Vector7 u1 = Vector7::Zero();
  u1(fhn::kE1) = -1.0;
  CHECK((frame.U1 - u1).norm() <= 1e-15);
  Vector7 u2 = Vector7::Zero();
  u2(fhn::kE1) = 1.0;
  u2(fhn::kF1) = 1.0;
  CHECK((frame.U2 - u2).norm() <= 1e-15);
  Vector7 v1 = Vector7::Zero();
  v1(fhn::kF1) = 0.5;
  CHECK((frame.V[0] - v1).norm() <= 1e-15);
}

TEST_CASE("bracket relations via the frame structure constants") {
  // [V_i, V_j] = sum_mn V_im V_jn [F_m, F_n] + (V_i(V_jn) - V_j(V_in)) F_n
  // with [F_m, F_n] = -2 F_l and the analytic coefficient derivatives
  // V_k(g_i) = sum_n g_kn (e_n x g_i) along the F-flows.
  for (int trial = 0; trial < 50; ++trial) {
    const Quaternion p = randomUnit(), q = randomUnit();
    const KillingFrame frame = killingFrame(p, q);
    Eigen::Matrix3d g;  // rows g_i = coefficients of V_i on F (times 2)
    for (int i = 0; i < 3; ++i)
      for (int m = 0; m < 3; ++m) g(i, m) = 2.0 * frame.V[i](fhn::kF1 + m);

    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      Eigen::Vector3d bracket = Eigen::Vector3d::Zero();  // coefficients on F
      // structure-constant part
      for (int m = 0; m < 3; ++m) {
        for (int n = 0; n < 3; ++n) {
          if (m == n) continue;
          const int l = 3 - m - n;
          const double sign = ((m + 1) % 3 == n) ? 1.0 : -1.0;  // eps_{mnl}
          bracket(l) += 0.25 * g(i, m) * g(j, n) * (-2.0) * sign;
        }
      }
      // coefficient-derivative part: V_a(g_b) = sum_n (1/2) g_an * 2 (e_n x g_b)
      for (int n = 0; n < 3; ++n) {
        Eigen::Vector3d en = Eigen::Vector3d::Zero();
        en(n) = 1.0;
        bracket += 0.5 * (0.5 * g(i, n)) * 2.0 * en.cross(g.row(j).transpose());
        bracket -= 0.5 * (0.5 * g(j, n)) * 2.0 * en.cross(g.row(i).transpose());
      }
      // expect [V_i, V_j] = V_k, i.e. (1/2) g_k on F
      CHECK((bracket - 0.5 * g.row(k).transpose()).norm() <= 1e-12);
    }
  }
}

TEST_CASE("phi(U1, U2, V_i) vanishes on the orbit directions") {
  const auto& sol = bsSolution();
  const double t = 0.6 * sol.tEnd();
  const AlternatingForm phi = fhn::assemblePhi(sol, t);
  for (int trial = 0; trial < 50; ++trial) {
    const KillingFrame frame = killingFrame(randomUnit(), randomUnit());
    for (int i = 0; i < 3; ++i) {
      std::array<Eigen::VectorXd, 3> vecs{Eigen::VectorXd(frame.U1),
                                          Eigen::VectorXd(frame.U2),
                                          Eigen::VectorXd(frame.V[i])};
      CHECK(std::abs(phi({vecs.data(), 3})) <= 1e-12);
    }
  }
}

TEST_CASE("moment value special cases") {
  const auto& sol = bsSolution();
  const double t = 0.5 * sol.tEnd();
  const fhn::State s = sol.at(t);

  HopfPair aligned;
  aligned.v = aligned.w = Eigen::Vector3d(0, 1, 0);
  CHECK(momentValues(aligned, s, sol.params()).mu.norm() == 0.0);

  HopfPair perp;
  perp.v = Eigen::Vector3d(1, 0, 0);
  perp.w = Eigen::Vector3d(0, 1, 0);
  CHECK(momentValues(perp, s, sol.params()).nu == 0.0);

  for (int trial = 0; trial < 20; ++trial) {
    const HopfPair pair = hopfPair(randomUnit(), randomUnit());
    const MomentValues m = momentValues(pair, s, sol.params());
    CHECK(m.theta2.norm() ==
          doctest::Approx(2.0 * std::abs(s.b + sol.params().c2)).epsilon(1e-13));
  }
}

TEST_CASE("mu norm formula |mu| = 4 adot bdot sin(theta)") {
  const auto& sol = bsSolution();
  const double t = 0.7 * sol.tEnd();
  const fhn::State s = sol.at(t);
  for (int trial = 0; trial < 50; ++trial) {
    const HopfPair pair = hopfPair(randomUnit(), randomUnit());
    const double ct = pair.cosTheta();
    const double st = std::sqrt(1.0 - ct * ct);
    const MomentValues m = momentValues(pair, s, sol.params());
    CHECK(m.mu.norm() ==
          doctest::Approx(4.0 * s.adot() * s.bdot() * st).epsilon(1e-12));
  }
}

TEST_CASE("mu vanishes exactly on v = +-w") {
  const auto& sol = bsSolution();
  const fhn::State s = sol.at(0.5 * sol.tEnd());
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector3d v = Eigen::Vector3d::Random().normalized();
    HopfPair plus{v, v}, minus{v, -v};
    CHECK(momentValues(plus, s, sol.params()).mu.norm() == 0.0);
    CHECK(momentValues(minus, s, sol.params()).mu.norm() == 0.0);
    Eigen::Vector3d w = Eigen::Vector3d::Random().normalized();
    if ((w - v).norm() > 1e-3 && (w + v).norm() > 1e-3)
      CHECK(momentValues(HopfPair{v, w}, s, sol.params()).mu.norm() > 0.0);
  }
}

TEST_CASE("equivariance of the moment values") {
  const auto& sol = bsSolution();
  const double t = 0.4 * sol.tEnd();
  for (int trial = 0; trial < 30; ++trial) {
    const Quaternion p = randomUnit(), q = randomUnit(), gamma = randomUnit();
    const MomentValues base = momentValues(hopfPair(p, q), sol, t);
    const MomentValues moved = momentValues(hopfPair(p, gamma * q), sol, t);
    CHECK(moved.nu == doctest::Approx(base.nu).epsilon(1e-10));
    CHECK(moved.eta == doctest::Approx(base.eta).epsilon(1e-10));
    CHECK((moved.mu - gamma.rotate(base.mu)).norm() <= 1e-10 * (1 + base.mu.norm()));
    CHECK((moved.theta1 - gamma.rotate(base.theta1)).norm() <=
          1e-10 * (1 + base.theta1.norm()));
    CHECK((moved.theta2 - gamma.rotate(base.theta2)).norm() <=
          1e-10 * (1 + base.theta2.norm()));
  }
}

TEST_CASE("Bryant-Salamon moment table") {
  const double c = 0.8;
  HopfPair aligned;
  aligned.v = aligned.w = Eigen::Vector3d(0, 0, 1);
  const MomentValues case0 = bsMomentValues(BsCase::kCase0, aligned, 1.0, c);
  CHECK(case0.nu == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-14));

  HopfPair crossed;
  crossed.v = Eigen::Vector3d(1, 0, 0);
  crossed.w = Eigen::Vector3d(0, 1, 0);
  const MomentValues m0 = bsMomentValues(BsCase::kCase0, crossed, 1.0, 1.0);
  CHECK(m0.mu.norm() == doctest::Approx(3.0 * std::cbrt(2.0)).epsilon(1e-14));
}

TEST_CASE("case-1 table equals the FHN moment values on the BS solution") {
  const double c = 1.0;
  const auto& sol = bsSolution();
  for (int trial = 0; trial < 25; ++trial) {
    const Quaternion p = randomUnit(), q = randomUnit();
    const double r = 0.4 + 3.0 * trial / 25.0;
    const double t = fhn::bsArcLength(r, c);
    const HopfPair pair = bsHopfPair(BsCase::kCase1, p, q);
    const MomentValues table = bsMomentValues(BsCase::kCase1, pair, r, c);
    const MomentValues direct = momentValues(pair, sol.at(t), sol.params());
    CHECK(table.nu == doctest::Approx(direct.nu).epsilon(1e-9));
    CHECK((table.theta1 - direct.theta1).norm() <= 1e-9 * (1 + direct.theta1.norm()));
    CHECK((table.theta2 - direct.theta2).norm() <= 1e-9 * (1 + direct.theta2.norm()));
    CHECK((table.mu - direct.mu).norm() <= 1e-9 * (1 + direct.mu.norm()));
    // case-0 rows against the same underlying geometry:
    // nu_case0 = 2 <theta1_FHN, w>, and the mu rows agree.
    const MomentValues case0 = bsMomentValues(BsCase::kCase0, pair, r, c);
    CHECK(case0.nu ==
          doctest::Approx(2.0 * direct.theta1.dot(pair.w)).epsilon(1e-9));
    CHECK((case0.mu - direct.mu).norm() <= 1e-9 * (1 + direct.mu.norm()));
  }
}

TEST_CASE("gradient identities for nu and mu") {
  const auto& sol = bsSolution();
  for (int trial = 0; trial < 10; ++trial) {
    const Quaternion p = randomUnit(), q = randomUnit();
    const double t = sol.tBegin() + (0.2 + 0.6 * trial / 10.0) * (sol.tEnd() - sol.tBegin());
    CHECK(gradientIdentityResidual(GradientIdentity::kNu, p, q, sol, t, 1e-4) <= 1e-6);
    CHECK(gradientIdentityResidual(GradientIdentity::kMu, p, q, sol, t, 1e-4) <= 1e-5);
    CHECK(gradientIdentityResidual(GradientIdentity::kThetaAlternative, p, q, sol, t, 0) <=
          1e-9);
  }
}

TEST_CASE("mu is constant along the associative direction") {
  const auto& sol = bsSolution();
  for (int trial = 0; trial < 10; ++trial) {
    const Quaternion p = randomUnit(), q = randomUnit();
    const double t = sol.tBegin() + (0.3 + 0.5 * trial / 10.0) * (sol.tEnd() - sol.tBegin());
    CHECK(muDerivativeAlongAssociative(p, q, sol, t, 1e-4) <= 1e-8);
  }
}

TEST_CASE("mu contraction formula matches the closed form") {
  const auto& sol = bsSolution();
  const double t = 0.55 * sol.tEnd();
  const fhn::State s = sol.at(t);
  for (int trial = 0; trial < 20; ++trial) {
    const Quaternion p = randomUnit(), q = randomUnit();
    const Eigen::Vector3d lemma = muContractionFormula(p, q, s, sol.params());
    const Eigen::Vector3d closed = momentValues(hopfPair(p, q), s, sol.params()).mu;
    CHECK((lemma - closed).norm() <= 1e-11 * (1 + closed.norm()));
  }
}

TEST_CASE("su2 coassociative obstruction") {
  CHECK(std::abs(su2CoassocObstruction(bsSolution())) <= 1e-9);  // c2 = 0

  fhn::Params kmn;
  kmn.diagram = fhn::Diagram::kKmn;
  kmn.m = kmn.n = 1;
  kmn.c1 = -1.0;
  kmn.c2 = 1.0;
  const fhn::Solution sol = fhn::integrateFromSingularOrbit(kmn, {}, 1.2, 1e-10);
  CHECK(su2CoassocObstruction(sol) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("concurrent readers of one solution agree") {
  const auto& sol = bsSolution();
  const Quaternion p = randomUnit(), q = randomUnit();
  const double t = 0.5 * sol.tEnd();
  const MomentValues reference = momentValues(hopfPair(p, q), sol, t);

  std::vector<std::thread> workers;
  std::atomic<int> mismatches{0};
  for (int w = 0; w < 8; ++w) {
    workers.emplace_back([&] {
      for (int i = 0; i < 200; ++i) {
        const MomentValues m = momentValues(hopfPair(p, q), sol, t);
        if (m.nu != reference.nu || m.eta != reference.eta ||
            (m.mu - reference.mu).norm() != 0.0)
          ++mismatches;
      }
    });
  }
  for (auto& worker : workers) worker.join();
  CHECK(mismatches == 0);
}

TEST_CASE("eta primitive: positive integrand is increasing, derivative matches") {
  const auto& sol = bsSolution();
  double prev = -1.0;
  for (int i = 1; i <= 20; ++i) {
    const double t = sol.tBegin() + (sol.tEnd() - sol.tBegin()) * i / 21.0;
    const double eta = sol.etaIntegral(t);
    CHECK(eta > prev);
    prev = eta;
  }
  // d eta / dt equals the closed-form integrand and, with the orientation of
  // the moment tables, -*phi(V1, V2, V3, dt).
  const double t = 0.5 * sol.tEnd(), h = 1e-5;
  const double fd = (sol.etaIntegral(t + h) - sol.etaIntegral(t - h)) / (2 * h);
  const fhn::State s = sol.at(t);
  const fhn::Params& pr = sol.params();
  const double integrand =
      (2.0 * s.b * s.a * s.a + pr.c2 * (s.b * s.b + 2 * s.a * s.a + pr.c1 * pr.c2)) /
      std::sqrt(fhn::minusLambda(s.a, s.b, pr));
  CHECK(fd == doctest::Approx(integrand).epsilon(1e-8));

  const KillingFrame frame = killingFrame(randomUnit(), randomUnit());
  const AlternatingForm sp = fhn::assembleStarPhi(sol, t);
  Vector7 dt_dir = Vector7::Zero();
  dt_dir(fhn::kDt) = 1.0;
  std::array<Eigen::VectorXd, 4> vecs{Eigen::VectorXd(frame.V[0]),
                                      Eigen::VectorXd(frame.V[1]),
                                      Eigen::VectorXd(frame.V[2]), Eigen::VectorXd(dt_dir)};
  CHECK(-sp({vecs.data(), 4}) == doctest::Approx(integrand).epsilon(1e-11));
}
