/**
 * @file dynamics.hpp
 * @brief Operational-space equations of motion of the 3-RRR robot:
 *        M_x xddot + C_x xdot + g_x + F_fr,x = F_m + F_ext.
 *
 * The inertia matrix is assembled by subsystem projection: every body's
 * (mass, inertia) is pulled into platform coordinates through its velocity
 * Jacobian. C_x uses Christoffel symbols of M_x so that the skew identity
 * Mdot_x = C_x + C_x^T holds; dM/dx is taken by central differences with
 * branch-consistent joint updates. Drive friction (viscous plus a
 * tanh-smoothed Coulomb term) is projected through the active-joint rows of
 * J_qx.
 */
#pragma once

#include <functional>

#include "prsim/kinematics.hpp"
#include "prsim/types.hpp"

namespace prsim {

struct DynamicsTerms {
  Mat3 M = Mat3::Zero();       // inertia matrix, SPD
  Mat3 C = Mat3::Zero();       // Coriolis/centrifugal matrix
  Vec3 g = Vec3::Zero();       // gravity terms
  Vec3 friction = Vec3::Zero();  // projected drive friction
};

/// Velocity width of the tanh Coulomb smoothing [rad/s].
inline constexpr double kCoulombSmoothing = 1e-3;

/// Operational-space inertia matrix at a consistent (q, x).
Mat3 mass_matrix(const RobotModel& model, const JointConfig& q,
                 const PlatformPose& x);

/// All dynamics terms at a consistent state. Throws SingularJacobian.
DynamicsTerms compute_terms(const RobotModel& model, const JointConfig& q,
                            const PlatformPose& x, const Vec3& xdot);

/// xddot = M^{-1} (F_m + F_ext - C xdot - g - F_fr).
Vec3 forward_dynamics(const DynamicsTerms& terms, const Vec3& xdot,
                      const Wrench& f_motor, const Wrench& f_ext);
Vec3 forward_dynamics(const RobotModel& model, const JointConfig& q,
                      const PlatformPose& x, const Vec3& xdot,
                      const Wrench& f_motor, const Wrench& f_ext);

struct LinkForceProjection {
  Wrench platform;  // F_ext,mP = J_xCx^T F_link
  Vec3 tau_a;       // tau_a,ext = J_xCqa^T F_link
};

/// Projects a 2D force acting at a structure point onto platform coordinates
/// and the actuated joints.
LinkForceProjection project_link_force(const RobotGeometry& geom,
                                       const JointConfig& q,
                                       const PlatformPose& x,
                                       const ContactLocation& loc,
                                       const Vec2& f_link);

/// tau_a = J_xqa^T F_m (principle of virtual work).
Vec3 actuation_map(const RobotGeometry& geom, const JointConfig& q,
                   const PlatformPose& x, const Wrench& f_motor);

/// Smoothed drive friction torques for given active-joint rates.
Vec3 drive_friction(const DynamicsParams& dyn, const Vec3& qa_dot);

double kinetic_energy(const RobotModel& model, const JointConfig& q,
                      const PlatformPose& x, const Vec3& xdot);
double potential_energy(const RobotModel& model, const JointConfig& q,
                        const PlatformPose& x);

enum class Integrator { SemiImplicitEuler, RK4 };

/// Total applied wrench (motor + external) as a function of the plant state.
using AppliedWrenchFn = std::function<Wrench(
    const JointConfig& q, const PlatformPose& x, const Vec3& xdot)>;

/// Advances the plant by one fixed step. The elbow branch never switches
/// implicitly; joints are recovered by branch-consistent IK at every
/// evaluation point. Throws SimDiverged on non-finite results.
PlatformState integrate_step(const RobotModel& model,
                             const std::array<int, kNumChains>& branch,
                             const PlatformState& state, double dt,
                             const AppliedWrenchFn& applied,
                             Integrator integrator);

}  // namespace prsim
