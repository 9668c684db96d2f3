/**
 * @file contact_geometry.hpp
 * @brief Line-of-action recovery from the observed wrench and the
 *        minimum-distance features used for chain classification and
 *        structure opening.
 *
 * The observed moment satisfies m^ = r x f^ for any lever r from the
 * platform origin to the line of action. The minimum-norm lever follows from
 * the pseudoinverse of the cross-product matrix; in the plane it reduces to
 *   r_mP,LoA = m^_z (f_y, -f_x) / ||f||^2,   n^_f = f^ / ||f^||.
 */
#pragma once

#include <utility>

#include "prsim/kinematics.hpp"
#include "prsim/types.hpp"

namespace prsim {

struct LineOfAction {
  Vec2 lever = Vec2::Zero();  // r_mP,LoA: platform-origin lever, world axes [m]
  Vec2 dir = Vec2::Zero();    // n^_f: unit force direction
  bool valid = false;         // false when ||f^|| < f_min
};

/// Planar line-of-action estimate. Returns valid = false when the force
/// magnitude is below `f_min`; the direction is undefined then.
LineOfAction line_of_action(const Wrench& f_ext_hat, double f_min = 1.0);

/// General spatial form r = (S^T(f^))^+ m^ via the Moore-Penrose inverse of
/// the cross-product matrix. Provided for non-planar robots; the planar
/// pipeline uses line_of_action(). Returns {lever, unit direction}.
std::pair<Vec3, Vec3> line_of_action_spatial(const Vec3& force,
                                             const Vec3& moment);

/// Per-chain perpendicular distance from the coupling joints to the line of
/// action: d_i = ||(r_cJi - r_mP,LoA) x n^_f||. Coupling-joint levers are
/// taken relative to the platform origin, consistent with the wrench frame.
/// Throws InvalidLoA when called with an invalid line.
Vec3 min_distances(const RobotGeometry& geom, const JointConfig& q,
                   const LineOfAction& loa);

/// Sign of dq_p,i / dx_r, read from J_qx. The clamping angle
/// q_cl = pi - q_p,i opens when x_r moves against this sign. Returns 0 inside
/// the dead zone |entry| < 1e-9. Throws SingularJacobian.
int clamping_angle_gradient_sign(const RobotGeometry& geom,
                                 const JointConfig& q, const PlatformPose& x,
                                 int chain);

}  // namespace prsim
