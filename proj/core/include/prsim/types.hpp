/**
 * @file types.hpp
 * @brief Domain types of the planar 3-RRR parallel robot.
 *
 * Conventions:
 *  - Operational space (platform) coordinates x = [x_t; x_r]: translation of
 *    the platform origin in the world frame [m] and the platform orientation
 *    angle [rad], wrapped to (-pi, pi].
 *  - Each leg chain i has three revolute joints: active q_a,i at the base
 *    anchor (absolute angle of link 1), passive q_p,i at the elbow (angle of
 *    link 2 relative to link 1) and coupling q_c,i at the platform anchor.
 *    Angle-sum consistency q_a,i + q_p,i + q_c,i = x_r holds per chain.
 *  - Wrenches are generalized planar forces (f_x [N], f_y [N], m_z [N m])
 *    conjugate to xdot.
 */
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "prsim/errors.hpp"

namespace prsim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat9x3 = Eigen::Matrix<double, 9, 3>;
using Mat2x9 = Eigen::Matrix<double, 2, 9>;
using Mat2x3 = Eigen::Matrix<double, 2, 3>;

/// Planar generalized force (f_x, f_y, m_z).
using Wrench = Vec3;

inline constexpr int kNumChains = 3;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

/// 2D rotation matrix.
inline Mat2 rot2(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

/// Unit vector at angle a.
inline Vec2 unit_vec(double a) { return {std::cos(a), std::sin(a)}; }

/// Derivative of unit_vec w.r.t. the angle.
inline Vec2 unit_vec_deriv(double a) { return {-std::sin(a), std::cos(a)}; }

/// Scalar z-component of the planar cross product a x b.
inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// 90-degree rotation (the planar S operator): perp(v) = S v.
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

/// Platform pose x = [x_t; x_r], orientation wrapped to (-pi, pi].
struct PlatformPose {
  Vec2 t = Vec2::Zero();
  double r = 0.0;

  PlatformPose() = default;
  PlatformPose(const Vec2& t_, double r_) : t(t_), r(wrap_angle(r_)) {}
  explicit PlatformPose(const Vec3& v) : t(v.head<2>()), r(wrap_angle(v.z())) {}

  Vec3 vec() const { return {t.x(), t.y(), r}; }
};

/// Pose plus operational-space velocity.
struct PlatformState {
  PlatformPose pose;
  Vec3 vel = Vec3::Zero();
};

/// Joint angles of all three chains: active, passive, coupling per chain.
struct JointConfig {
  std::array<double, kNumChains> a{};  // active q_a,i [rad]
  std::array<double, kNumChains> p{};  // passive q_p,i [rad]
  std::array<double, kNumChains> c{};  // coupling q_c,i [rad]

  /// Stacked q = [q_1; q_2; q_3] with q_i = (q_a,i, q_p,i, q_c,i).
  Vec9 stacked() const {
    Vec9 q;
    for (int i = 0; i < kNumChains; ++i) {
      q[3 * i] = a[i];
      q[3 * i + 1] = p[i];
      q[3 * i + 2] = c[i];
    }
    return q;
  }

  Vec3 actives() const { return {a[0], a[1], a[2]}; }

  /// Elbow branch signs (+1 / -1) from the passive joint angles.
  std::array<int, kNumChains> branch() const {
    std::array<int, kNumChains> b{};
    for (int i = 0; i < kNumChains; ++i) b[i] = p[i] >= 0.0 ? +1 : -1;
    return b;
  }
};

/// Where a contact acts on the robot structure.
struct ContactLocation {
  enum class Body { Link1, Link2, Platform };

  int chain = 0;  // 0-based chain index
  Body body = Body::Platform;
  /// Normalized arc position in [0,1]. For links: fraction along the link
  /// from its proximal joint. For the platform: fraction along the segment
  /// from the platform origin to the chain's platform anchor.
  double s = 0.0;
};

/// Geometric parameters of the 3-RRR structure.
struct RobotGeometry {
  std::array<Vec2, kNumChains> base_anchor{};      // world frame [m]
  std::array<Vec2, kNumChains> platform_anchor{};  // platform frame [m]
  std::array<double, kNumChains> link1_len{};      // [m]
  std::array<double, kNumChains> link2_len{};      // [m]

  void validate() const {
    for (int i = 0; i < kNumChains; ++i) {
      if (!(link1_len[i] > 0.0) || !(link2_len[i] > 0.0))
        throw ConfigError("link lengths must be positive");
      for (int j = i + 1; j < kNumChains; ++j) {
        if ((base_anchor[i] - base_anchor[j]).norm() < 1e-12)
          throw ConfigError("base anchors must be pairwise distinct");
        if ((platform_anchor[i] - platform_anchor[j]).norm() < 1e-12)
          throw ConfigError("platform anchors must be pairwise distinct");
      }
    }
  }

  /// Symmetric default: base anchors on a 0.4 m circle, platform anchors on a
  /// 0.1 m circle (both at 90/210/330 deg), l1 = l2 = 0.25 m.
  static RobotGeometry symmetric();
};

/// Inertial and friction parameters for the dynamics model.
struct DynamicsParams {
  std::array<double, kNumChains> link1_mass{};     // [kg]
  std::array<double, kNumChains> link2_mass{};     // [kg]
  std::array<double, kNumChains> link1_inertia{};  // about COM [kg m^2]
  std::array<double, kNumChains> link2_inertia{};  // about COM [kg m^2]
  std::array<double, kNumChains> link1_com{};      // COM arc fraction [0,1]
  std::array<double, kNumChains> link2_com{};
  double platform_mass = 0.0;     // [kg]
  double platform_inertia = 0.0;  // about platform origin [kg m^2]
  std::array<double, kNumChains> drive_viscous{};  // [N m s/rad]
  std::array<double, kNumChains> drive_coulomb{};  // [N m]
  Vec2 gravity = Vec2::Zero();                     // in-plane [m/s^2]

  void validate() const {
    for (int i = 0; i < kNumChains; ++i) {
      if (link1_mass[i] < 0 || link2_mass[i] < 0 || link1_inertia[i] < 0 ||
          link2_inertia[i] < 0 || drive_coulomb[i] < 0)
        throw ConfigError("masses, inertias and Coulomb levels must be >= 0");
    }
    if (platform_mass < 0 || platform_inertia < 0)
      throw ConfigError("platform mass/inertia must be >= 0");
  }

  /// 0.5 kg rod links, 1.0 kg disc platform, light drive friction.
  static DynamicsParams defaults(const RobotGeometry& geom);
};

/// Full robot model: geometry plus dynamic parameters.
struct RobotModel {
  RobotGeometry geom;
  DynamicsParams dyn;

  static RobotModel standard() {
    RobotModel m;
    m.geom = RobotGeometry::symmetric();
    m.dyn = DynamicsParams::defaults(m.geom);
    return m;
  }
};

}  // namespace prsim
