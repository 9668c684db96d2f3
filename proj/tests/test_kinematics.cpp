#include <doctest.h>

#include <random>

#include "prsim/kinematics.hpp"
#include "support.hpp"

using namespace prsim;
using prsim::testing::fd_jacobian3;
using prsim::testing::random_state;

namespace {

const RobotGeometry kGeom = RobotGeometry::symmetric();

/// Independent vector-loop residual: walks each chain base -> elbow -> coupling
/// and subtracts the platform-side anchor. Kept separate from the library
/// implementation on purpose.
Vec2 loop_oracle(const RobotGeometry& g, const JointConfig& q,
                 const PlatformPose& x, int i) {
  const Vec2 elbow =
      g.base_anchor[i] +
      g.link1_len[i] * Vec2(std::cos(q.a[i]), std::sin(q.a[i]));
  const Vec2 coupling =
      elbow + g.link2_len[i] *
                  Vec2(std::cos(q.a[i] + q.p[i]), std::sin(q.a[i] + q.p[i]));
  const double c = std::cos(x.r), s = std::sin(x.r);
  const Vec2 anchor = g.platform_anchor[i];
  const Vec2 platform_side =
      x.t + Vec2(c * anchor.x() - s * anchor.y(),
                 s * anchor.x() + c * anchor.y());
  return coupling - platform_side;
}

}  // namespace

TEST_CASE("constraints residual vanishes for IK-consistent states") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_state(kGeom, rng);
    CHECK(constraints_residual(kGeom, s.q, s.pose).lpNorm<Eigen::Infinity>() <
          1e-9);
  }
}

TEST_CASE("perturbing one passive joint breaks only that chain's rows") {
  std::mt19937_64 rng(11);
  const auto s = random_state(kGeom, rng);
  for (int i = 0; i < kNumChains; ++i) {
    JointConfig q = s.q;
    q.p[i] += 0.1;
    const Vec9 res = constraints_residual(kGeom, q, s.pose);
    for (int c = 0; c < kNumChains; ++c) {
      const double block = res.segment<3>(3 * c).lpNorm<Eigen::Infinity>();
      if (c == i)
        CHECK(block > 1e-3);
      else
        CHECK(block < 1e-12);
    }
  }
}

TEST_CASE("constraints residual matches an independent vector-loop oracle") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double>jitter(-0.4, 0.4);
  for (int trial = 0; trial < 100; ++trial) {
    // Random, generally inconsistent joints and pose.
    auto s = random_state(kGeom, rng);
    JointConfig q = s.q;
    for (int i = 0; i < kNumChains; ++i) {
      q.a[i] += jitter(rng) * 0.2;
      q.p[i] += jitter(rng) * 0.2;
      q.c[i] += jitter(rng) * 0.2;
    }
    const Vec9 res = constraints_residual(kGeom, q, s.pose);
    for (int i = 0; i < kNumChains; ++i) {
      const Vec2 oracle = loop_oracle(kGeom, q, s.pose, i);
      CHECK(res[3 * i] == doctest::Approx(oracle.x()).epsilon(1e-12));
      CHECK(res[3 * i + 1] == doctest::Approx(oracle.y()).epsilon(1e-12));
    }
  }
}

TEST_CASE("IK straight-arm boundary gives q_p = 0") {
  // Coupling target of chain 1 at distance l1+l2 from its base anchor,
  // pointing through the workspace so the other chains stay reachable.
  const Vec2 dir = -kGeom.base_anchor[0].normalized();
  const Vec2 target =
      kGeom.base_anchor[0] + (kGeom.link1_len[0] + kGeom.link2_len[0]) * dir;
  const PlatformPose pose{target - kGeom.platform_anchor[0], 0.0};
  const JointConfig q = inverse_kinematics(kGeom, pose, {+1, +1, +1});
  CHECK(std::abs(q.p[0]) < 1e-6);
}

TEST_CASE("IK round trip reproduces the coupling points") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_state(kGeom, rng);
    const auto coupling = coupling_joint_positions(kGeom, s.q);
    const Mat2 rot = rot2(s.pose.r);
    for (int i = 0; i < kNumChains; ++i) {
      const Vec2 target = s.pose.t + rot * kGeom.platform_anchor[i];
      CHECK((coupling[i] - target).norm() < 1e-9);
    }
  }
}

TEST_CASE("IK agrees with a Newton root-finder oracle on both branches") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> upos(-0.08, 0.08);
  std::uniform_real_distribution<double> urot(-0.4, 0.4);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const PlatformPose pose{Vec2(upos(rng), upos(rng)), urot(rng)};
    for (int sign : {+1, -1}) {
      JointConfig q;
      try {
        q = inverse_kinematics(kGeom, pose, {sign, sign, sign});
      } catch (const Unreachable&) {
        continue;
      }
      CHECK(constraints_residual(kGeom, q, pose).lpNorm<Eigen::Infinity>() <
            1e-9);
      for (int i = 0; i < kNumChains; ++i)
        CHECK((sign >= 0 ? q.p[i] >= -1e-12 : q.p[i] <= 1e-12));
      // Newton iteration on the 2D loop equation of chain 0, seeded away
      // from the analytic answer, must come back to it.
      Eigen::Vector2d ang(q.a[0] + 0.04, q.p[0] - 0.05);
      for (int it = 0; it < 60; ++it) {
        JointConfig qn = q;
        qn.a[0] = ang[0];
        qn.p[0] = ang[1];
        const Vec2 r = loop_oracle(kGeom, qn, pose, 0);
        Mat2 jac;
        const Vec2 d1 = kGeom.link1_len[0] * unit_vec_deriv(ang[0]);
        const Vec2 d2 = kGeom.link2_len[0] * unit_vec_deriv(ang[0] + ang[1]);
        jac.col(0) = d1 + d2;
        jac.col(1) = d2;
        ang -= jac.inverse() * r;
      }
      CHECK(std::abs(wrap_angle(ang[0] - q.a[0])) < 1e-9);
      CHECK(std::abs(wrap_angle(ang[1] - q.p[0])) < 1e-9);
      ++checked;
    }
  }
  CHECK(checked > 1500);  // both branches exercised
}

TEST_CASE("FK fixed point and perturbed-guess basin") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> upos(-0.05, 0.05);
  std::uniform_real_distribution<double> urot(-0.1, 0.1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_state(kGeom, rng);
    const Vec3 q_a = s.q.actives();

    const FkResult exact = forward_kinematics(kGeom, q_a, s.pose);
    CHECK((exact.pose.vec() - s.pose.vec()).lpNorm<Eigen::Infinity>() < 1e-9);

    PlatformPose guess{s.pose.t + Vec2(upos(rng), upos(rng)),
                       s.pose.r + urot(rng)};
    const FkResult fk = forward_kinematics(kGeom, q_a, guess);
    CHECK(fk.iterations <= 20);
    CHECK((fk.pose.vec() - s.pose.vec()).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(reduced_residual(kGeom, q_a, fk.pose).lpNorm<Eigen::Infinity>() <
          1e-10);
  }
}

TEST_CASE("FK throws SingularJacobian at a constructed parallel singularity") {
  // All three distal links aligned with rays through the platform centre:
  // elbows at radius r_e = r_p + l2 on the coupling-point rays. The platform
  // rotation phi making that elbow radius consistent with l1 follows from
  // the law of cosines in the (base anchor, origin, elbow) triangle.
  const double r_p = 0.1, l1 = 0.25, l2 = 0.25, r_b = 0.4;
  const double r_e = r_p + l2;
  const double cos_phi =
      (r_e * r_e + r_b * r_b - l1 * l1) / (2.0 * r_e * r_b);
  REQUIRE(std::abs(cos_phi) <= 1.0);
  const double phi = std::acos(cos_phi);
  const PlatformPose pose{Vec2::Zero(), phi};

  JointConfig q;
  for (int i = 0; i < kNumChains; ++i) {
    const Vec2 coupling = rot2(phi) * kGeom.platform_anchor[i];
    const Vec2 elbow = coupling * (r_e / r_p);
    const Vec2 u1 = elbow - kGeom.base_anchor[i];
    const Vec2 u2 = coupling - elbow;
    q.a[i] = std::atan2(u1.y(), u1.x());
    q.p[i] = wrap_angle(std::atan2(u2.y(), u2.x()) - q.a[i]);
    q.c[i] = wrap_angle(pose.r - q.a[i] - q.p[i]);
  }
  REQUIRE(constraints_residual(kGeom, q, pose).lpNorm<Eigen::Infinity>() <
          1e-9);
  // Numeric rank check of the reduced Jacobian at the constructed pose.
  const Mat3 jac = reduced_jacobian_x(kGeom, q.actives(), pose);
  Eigen::JacobiSVD<Mat3> svd(jac);
  CHECK(svd.singularValues()(2) / svd.singularValues()(0) < 1e-12);

  CHECK_THROWS_AS(forward_kinematics(kGeom, q.actives(), pose),
                  SingularJacobian);
  CHECK_THROWS_AS(jacobian_x_qa(kGeom, q, pose), SingularJacobian);
}

TEST_CASE("differential kinematics: chain-rule identity and finite differences") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_state(kGeom, rng);
    const Mat9x3 j_qx = jacobian_q_x(kGeom, s.q, s.pose);
    const Mat3 j_xqa = jacobian_x_qa(kGeom, s.q, s.pose);

    Mat3 j_qax;
    for (int i = 0; i < kNumChains; ++i) j_qax.row(i) = j_qx.row(3 * i);
    CHECK((j_xqa * j_qax - Mat3::Identity()).lpNorm<Eigen::Infinity>() < 1e-8);

    // dq/dx from IK with the current branch.
    const auto branch = s.q.branch();
    const auto fd_q = fd_jacobian3(
        [&](const Vec3& xv) -> Eigen::VectorXd {
          return inverse_kinematics(kGeom, PlatformPose(xv), branch).stacked();
        },
        s.pose.vec());
    CHECK((fd_q - j_qx).norm() / j_qx.norm() < 1e-6);

    // dx/dq_a from the Newton-Raphson FK.
    const Vec3 qa0 = s.q.actives();
    Eigen::MatrixXd fd_x(3, 3);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      Vec3 p = qa0, m = qa0;
      p[k] += h;
      m[k] -= h;
      fd_x.col(k) = (forward_kinematics(kGeom, p, s.pose).pose.vec() -
                     forward_kinematics(kGeom, m, s.pose).pose.vec()) /
                    (2.0 * h);
    }
    CHECK((fd_x - j_xqa).norm() / j_xqa.norm() < 1e-6);

    // Pure platform rotation: per chain the joint rates sum to the rotation
    // rate (angle-sum consistency).
    const Vec9 qdot = j_qx * Vec3(0.0, 0.0, 1.0);
    for (int i = 0; i < kNumChains; ++i)
      CHECK(qdot.segment<3>(3 * i).sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("contact points: endpoints and the link-1 midpoint closed form") {
  std::mt19937_64 rng(31);
  const auto s = random_state(kGeom, rng);

  const Vec2 base = contact_point(
      kGeom, s.q, {1, ContactLocation::Body::Link1, 0.0});
  CHECK((base - kGeom.base_anchor[1]).norm() < 1e-14);

  const Vec2 tip =
      contact_point(kGeom, s.q, {2, ContactLocation::Body::Link2, 1.0});
  CHECK((tip - coupling_joint_positions(kGeom, s.q)[2]).norm() < 1e-14);

  const Vec2 mid =
      contact_point(kGeom, s.q, {0, ContactLocation::Body::Link1, 0.5});
  const Vec2 expect =
      kGeom.base_anchor[0] +
      0.5 * kGeom.link1_len[0] * Vec2(std::cos(s.q.a[0]), std::sin(s.q.a[0]));
  CHECK((mid - expect).norm() < 1e-14);
}

TEST_CASE("contact Jacobians: rigid-body form, finite differences, coupling") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = random_state(kGeom, rng);

    // Platform point: J_xCx = [I2 | perp(lever)].
    const ContactLocation center{0, ContactLocation::Body::Platform, 0.0};
    const ContactJacobians cj0 = contact_jacobians(kGeom, s.q, s.pose, center);
    CHECK((cj0.xc_x.leftCols<2>() - Mat2::Identity()).norm() < 1e-10);
    CHECK(cj0.xc_x.col(2).norm() < 1e-10);  // zero lever at the centre

    const ContactLocation edge{1, ContactLocation::Body::Platform, 0.7};
    const ContactJacobians cje = contact_jacobians(kGeom, s.q, s.pose, edge);
    const Vec2 lever = rot2(s.pose.r) * (0.7 * kGeom.platform_anchor[1]);
    CHECK((cje.xc_x.col(2) - perp(lever)).norm() < 1e-10);

    for (const ContactLocation loc :
         {ContactLocation{0, ContactLocation::Body::Link1, 0.6},
          ContactLocation{2, ContactLocation::Body::Link2, 0.4},
          ContactLocation{1, ContactLocation::Body::Platform, 0.5}}) {
      const ContactJacobians cj = contact_jacobians(kGeom, s.q, s.pose, loc);
      const auto branch = s.q.branch();
      const auto fd = fd_jacobian3(
          [&](const Vec3& xv) -> Eigen::VectorXd {
            const PlatformPose pose(xv);
            return contact_point(kGeom, inverse_kinematics(kGeom, pose, branch),
                                 loc);
          },
          s.pose.vec());
      CHECK((fd - cj.xc_x).norm() / cj.xc_x.norm() < 1e-6);

      // Factorization identities.
      const Mat9x3 j_qx = jacobian_q_x(kGeom, s.q, s.pose);
      const Mat3 j_xqa = jacobian_x_qa(kGeom, s.q, s.pose);
      CHECK((cj.xc_x - cj.xc_q * j_qx).lpNorm<Eigen::Infinity>() < 1e-10);
      CHECK((cj.xc_qa - cj.xc_x * j_xqa).lpNorm<Eigen::Infinity>() < 1e-10);
    }

    // A link-1 contact point is carried by its drive alone: the stacked form
    // has zero columns for the other chains, the platform projection couples
    // all coordinates, and the drive projection recovers exact decoupling.
    // A link-2 contact couples to all drives through its passive joint.
    const ContactLocation link1{0, ContactLocation::Body::Link1, 0.5};
    const ContactJacobians cj1 = contact_jacobians(kGeom, s.q, s.pose, link1);
    CHECK(cj1.xc_q.block<2, 6>(0, 3).norm() == 0.0);
    CHECK(cj1.xc_x.col(0).norm() > 1e-6);
    CHECK(cj1.xc_x.col(1).norm() > 1e-6);
    CHECK(cj1.xc_qa.col(1).norm() < 1e-12);
    CHECK(cj1.xc_qa.col(2).norm() < 1e-12);

    const ContactLocation link2{0, ContactLocation::Body::Link2, 0.5};
    const ContactJacobians cj2 = contact_jacobians(kGeom, s.q, s.pose, link2);
    CHECK(cj2.xc_q.block<2, 6>(0, 3).norm() == 0.0);
    CHECK(cj2.xc_qa.col(1).norm() > 1e-8);
    CHECK(cj2.xc_qa.col(2).norm() > 1e-8);
  }
}

TEST_CASE("coupling joints match the platform-side anchor transform") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_state(kGeom, rng);
    const auto pts = coupling_joint_positions(kGeom, s.q);
    for (int i = 0; i < kNumChains; ++i) {
      const Vec2 via_platform =
          s.pose.t + rot2(s.pose.r) * kGeom.platform_anchor[i];
      CHECK((pts[i] - via_platform).norm() < 1e-9);
      const Vec2 via_contact = contact_point(
          kGeom, s.q, {i, ContactLocation::Body::Link2, 1.0});
      CHECK((pts[i] - via_contact).norm() < 1e-14);
    }
  }
}

TEST_CASE("round trip: FK recovers IK poses from noisy guesses") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> upos(-0.05, 0.05);
  std::uniform_real_distribution<double> urot(-0.1, 0.1);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = random_state(kGeom, rng);
    const PlatformPose guess{s.pose.t + Vec2(upos(rng), upos(rng)),
                             s.pose.r + urot(rng)};
    const FkResult fk = forward_kinematics(kGeom, s.q.actives(), guess);
    CHECK((fk.pose.vec() - s.pose.vec()).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("unreachable pose reports the failing chain") {
  const PlatformPose pose{Vec2(0.5, 0.5), 0.0};
  CHECK_THROWS_AS(inverse_kinematics(kGeom, pose, {+1, +1, +1}), Unreachable);
}
