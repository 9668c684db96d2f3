#include <doctest.h>

#include <random>

#include "prsim/contact_geometry.hpp"
#include "support.hpp"

using namespace prsim;
using prsim::testing::random_state;

namespace {
const RobotGeometry kGeom = RobotGeometry::symmetric();
}

TEST_CASE("planar line of action matches the least-squares oracle") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nf(0.0, 8.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Wrench w(nf(rng), nf(rng), 0.3 * nf(rng));
    const LineOfAction loa = line_of_action(w, 1.0);
    if (w.head<2>().norm() < 1.0) {
      CHECK_FALSE(loa.valid);
      continue;
    }
    REQUIRE(loa.valid);
    // Min-norm solve of [f_y, -f_x] r = m via the pseudoinverse.
    Eigen::Matrix<double, 1, 2> s_t;
    s_t << w.y(), -w.x();
    const Vec2 oracle =
        s_t.completeOrthogonalDecomposition().pseudoInverse() *
        Eigen::Matrix<double, 1, 1>(w.z());
    CHECK((loa.lever - oracle).norm() < 1e-12);
    // Minimum-norm lever is perpendicular to the line direction.
    CHECK(std::abs(loa.lever.dot(loa.dir)) < 1e-10);
    // Reconstruction: lever x f == m.
    CHECK(std::abs(cross2(loa.lever, w.head<2>()) - w.z()) <
          1e-12 * std::max(1.0, std::abs(w.z())));
  }
}

TEST_CASE("line of action: textbook case and zero-moment case") {
  const LineOfAction loa = line_of_action(Wrench(0.0, 10.0, 1.0), 1.0);
  REQUIRE(loa.valid);
  CHECK((loa.lever - Vec2(0.1, 0.0)).norm() < 1e-14);
  CHECK((loa.dir - Vec2(0.0, 1.0)).norm() < 1e-14);

  const LineOfAction through_origin = line_of_action(Wrench(3.0, -4.0, 0.0));
  REQUIRE(through_origin.valid);
  CHECK(through_origin.lever.norm() == 0.0);
}

TEST_CASE("scale invariance of direction, lever and distances") {
  std::mt19937_64 rng(5);
  const auto s = random_state(kGeom, rng);
  const Wrench w(7.0, -3.0, 0.6);
  const LineOfAction a = line_of_action(w);
  const LineOfAction b = line_of_action(Wrench(5.0 * w));
  CHECK((a.dir - b.dir).norm() < 1e-12);
  CHECK((a.lever - b.lever).norm() < 1e-12);
  CHECK((min_distances(kGeom, s.q, a) - min_distances(kGeom, s.q, b))
            .lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("spatial pseudoinverse form agrees with the planar specialization") {
  const Wrench w(4.0, -2.5, 0.8);
  const LineOfAction planar = line_of_action(w);
  const auto [lever3, dir3] =
      line_of_action_spatial(Vec3(w.x(), w.y(), 0.0), Vec3(0.0, 0.0, w.z()));
  CHECK((lever3.head<2>() - planar.lever).norm() < 1e-12);
  CHECK(std::abs(lever3.z()) < 1e-12);
  CHECK((dir3.head<2>() - planar.dir).norm() < 1e-12);
}

TEST_CASE("distance feature is zero for a line through a coupling joint") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_state(kGeom, rng);
    const auto coupling = coupling_joint_positions(kGeom, s.q);
    for (int i = 0; i < kNumChains; ++i) {
      const Vec2 lever_cj = coupling[i] - s.pose.t;
      const Vec2 f = Vec2(3.0, 4.0 + trial * 0.01).normalized() * 15.0;
      const double mz = cross2(lever_cj, f);
      const LineOfAction loa = line_of_action(Wrench(f.x(), f.y(), mz));
      const Vec3 d = min_distances(kGeom, s.q, loa);
      CHECK(d[i] < 1e-10);
      CHECK(d.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("distance feature is invariant to common translations (Eq. form)") {
  // The formula depends only on the difference of the two levers.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nv(0.0, 0.3);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec2 cj(nv(rng), nv(rng)), lever(nv(rng), nv(rng));
    const Vec2 n = Vec2(nv(rng), nv(rng)).normalized();
    const Vec2 shift(nv(rng), nv(rng));
    const double d0 = std::abs(cross2(cj - lever, n));
    const double d1 = std::abs(cross2((cj + shift) - (lever + shift), n));
    CHECK(d0 == doctest::Approx(d1).epsilon(1e-12));
  }
}

TEST_CASE("min_distances rejects invalid lines of action") {
  std::mt19937_64 rng(13);
  const auto s = random_state(kGeom, rng);
  const LineOfAction invalid = line_of_action(Wrench(0.1, 0.0, 0.5), 1.0);
  CHECK_FALSE(invalid.valid);
  CHECK_THROWS_AS(min_distances(kGeom, s.q, invalid), InvalidLoA);
}

TEST_CASE("clamping-angle gradient sign matches finite differences") {
  std::mt19937_64 rng(17);
  int nonzero = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = random_state(kGeom, rng);
    for (int chain = 0; chain < kNumChains; ++chain) {
      const int sign = clamping_angle_gradient_sign(kGeom, s.q, s.pose, chain);
      const double h = 1e-6;
      const auto branch = s.q.branch();
      const PlatformPose xp{s.pose.t, s.pose.r + h};
      const PlatformPose xm{s.pose.t, s.pose.r - h};
      const double dqp =
          (inverse_kinematics(kGeom, xp, branch).p[chain] -
           inverse_kinematics(kGeom, xm, branch).p[chain]) /
          (2.0 * h);
      if (std::abs(dqp) > 1e-6) {
        CHECK(sign == (dqp > 0 ? 1 : -1));
        ++nonzero;
      }
    }
  }
  CHECK(nonzero > 2500);
}

TEST_CASE("gradient sign dead zone: anchor at the platform origin") {
  // A chain coupled at the platform origin does not react to rotation.
  RobotGeometry g = RobotGeometry::symmetric();
  g.platform_anchor[0] = Vec2::Zero();
  const PlatformPose pose{Vec2(0.0, -0.02), 0.0};
  const JointConfig q = inverse_kinematics(g, pose, {+1, +1, +1});
  CHECK(clamping_angle_gradient_sign(g, q, pose, 0) == 0);
}

TEST_CASE("gradient signs respect the 120-degree symmetry") {
  const Mat2 r120 = rot2(2.0 * M_PI / 3.0);
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_state(kGeom, rng, 0.06, 0.3);
    const PlatformPose rotated{r120 * s.pose.t, s.pose.r};
    JointConfig q2;
    try {
      q2 = inverse_kinematics(kGeom, rotated, {+1, +1, +1});
    } catch (const Unreachable&) {
      continue;
    }
    for (int chain = 0; chain < kNumChains; ++chain) {
      const int s1 = clamping_angle_gradient_sign(kGeom, s.q, s.pose, chain);
      const int s2 =
          clamping_angle_gradient_sign(kGeom, q2, rotated, (chain + 1) % 3);
      if (s1 != 0 && s2 != 0) CHECK(s1 == s2);
    }
  }
}
