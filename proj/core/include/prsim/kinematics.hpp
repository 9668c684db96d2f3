/**
 * @file kinematics.hpp
 * @brief Loop-closure constraints, analytic IK, Newton-Raphson FK and all
 *        Jacobians of the planar 3-RRR parallel robot.
 *
 * The full constraints R(q, x) = 0 stack, per chain, the 2D vector loop
 *   base_anchor + l1 u(q_a) + l2 u(q_a + q_p) - (x_t + rot2(x_r) b_i) = 0
 * and the coupling-angle consistency q_a + q_p + q_c - x_r = 0, giving a
 * square 9x9 Jacobian w.r.t. q. Eliminating the passive joints yields the
 * reduced constraints R_red(q_a, x) = 0, one squared-distance row per chain.
 *
 * Differential kinematics:
 *   qdot = -R_dq^{-1} R_dx xdot           = J_qx xdot
 *   xdot = -(R_red)_dx^{-1} (R_red)_dqa qadot = J_xqa qadot
 * and for an arbitrary structure point x_C:
 *   xCdot = J_xCq qdot = J_xCx xdot = J_xCqa qadot.
 */
#pragma once

#include <array>
#include <optional>

#include "prsim/types.hpp"

namespace prsim {

/// Full loop-closure residual; zero iff (q, x) is kinematically consistent.
Vec9 constraints_residual(const RobotGeometry& geom, const JointConfig& q,
                          const PlatformPose& x);

/// Reduced residual (passive joints eliminated), one row per chain:
/// ||coupling target - elbow(q_a)||^2 - l2^2.
Vec3 reduced_residual(const RobotGeometry& geom, const Vec3& q_a,
                      const PlatformPose& x);

/// Partials of the reduced residual, used by the Newton-Raphson FK.
Mat3 reduced_jacobian_x(const RobotGeometry& geom, const Vec3& q_a,
                        const PlatformPose& x);
Mat3 reduced_jacobian_qa(const RobotGeometry& geom, const Vec3& q_a,
                         const PlatformPose& x);

/// Analytic inverse kinematics. `branch[i]` selects the elbow sign of q_p,i.
/// Throws Unreachable if a coupling point is outside a chain's annulus.
JointConfig inverse_kinematics(const RobotGeometry& geom, const PlatformPose& x,
                               const std::array<int, kNumChains>& branch);

struct FkResult {
  PlatformPose pose;
  int iterations = 0;
};

/// Newton-Raphson forward kinematics on the reduced constraints.
/// Damped step (half-step on residual increase), tol 1e-10 on the max norm,
/// at most `max_iters` iterations. Throws NoConvergence / SingularJacobian.
FkResult forward_kinematics(const RobotGeometry& geom, const Vec3& q_a,
                            const PlatformPose& x_guess, int max_iters = 20);

/// Recovers the full joint configuration from actives and a consistent pose.
JointConfig joints_from_pose(const RobotGeometry& geom, const Vec3& q_a,
                             const PlatformPose& x);

/// J_qx = -R_dq^{-1} R_dx (9x3). Throws SingularJacobian near serial
/// singularities (sin q_p,i ~ 0).
Mat9x3 jacobian_q_x(const RobotGeometry& geom, const JointConfig& q,
                    const PlatformPose& x);

/// J_xqa = -(R_red)_dx^{-1} (R_red)_dqa (3x3). Throws SingularJacobian near
/// parallel singularities.
Mat3 jacobian_x_qa(const RobotGeometry& geom, const JointConfig& q,
                   const PlatformPose& x);

/// World position of a structure point.
Vec2 contact_point(const RobotGeometry& geom, const JointConfig& q,
                   const ContactLocation& loc);

/// J_xCq alone (2x9); nonzero only in the columns of the hosting chain.
Mat2x9 contact_jacobian_q(const RobotGeometry& geom, const JointConfig& q,
                          const ContactLocation& loc);

struct ContactJacobians {
  Mat2x9 xc_q;   // xCdot = xc_q qdot
  Mat2x3 xc_x;   // xCdot = xc_x xdot
  Mat2x3 xc_qa;  // xCdot = xc_qa qadot
};

/// All three contact-point Jacobians; xc_x = xc_q J_qx and xc_qa = xc_x J_xqa.
ContactJacobians contact_jacobians(const RobotGeometry& geom,
                                   const JointConfig& q, const PlatformPose& x,
                                   const ContactLocation& loc);

/// World positions of the three coupling joints (serial FK through each chain).
std::array<Vec2, kNumChains> coupling_joint_positions(const RobotGeometry& geom,
                                                      const JointConfig& q);

/// Platform pose reconstructed from a consistent q (chain 1 route).
PlatformPose pose_from_joints(const RobotGeometry& geom, const JointConfig& q);

namespace detail {
/// Full constraint partials R_dq (block diagonal, 9x9) and R_dx (9x3).
Mat9 constraints_jacobian_q(const RobotGeometry& geom, const JointConfig& q);
Mat9x3 constraints_jacobian_x(const RobotGeometry& geom, const PlatformPose& x);

/// 3x3 solve with an SVD rank check; throws SingularJacobian when the
/// condition number exceeds 1e12.
Mat3 solve_checked(const Mat3& a, const Mat3& rhs, const char* what);
Vec3 solve_checked(const Mat3& a, const Vec3& rhs, const char* what);
}  // namespace detail

}  // namespace prsim
