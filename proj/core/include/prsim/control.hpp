/**
 * @file control.hpp
 * @brief Cartesian impedance control in operational space with factorization
 *        damping design and runtime stiffness switching.
 */
#pragma once

#include <optional>

#include "prsim/dynamics.hpp"
#include "prsim/types.hpp"

namespace prsim {

struct ImpedanceConfig {
  Vec3 stiffness = Vec3(2000.0, 2000.0, 85.0);  // K_d diagonal [N/m, N/m, N m/rad]
  Vec3 damping_ratio = Vec3::Ones();            // D_xi diagonal
  /// Reduced translational stiffness commanded during a contact reaction.
  double reaction_stiffness_t = 2000.0;  // [N/m], <= stiffness for x/y
  std::optional<double> torque_limit;    // per-drive |tau_a| cap, off by default

  void validate() const {
    if ((stiffness.array() <= 0.0).any() || (damping_ratio.array() <= 0.0).any())
      throw ConfigError("impedance gains must be positive");
    if (reaction_stiffness_t > stiffness.x() + 1e-12 ||
        reaction_stiffness_t > stiffness.y() + 1e-12 || reaction_stiffness_t < 0)
      throw ConfigError("reaction stiffness must satisfy 0 <= K~ <= K_t");
  }
};

/// Desired platform motion sample.
struct DesiredState {
  PlatformPose pose;
  Vec3 vel = Vec3::Zero();
  Vec3 acc = Vec3::Zero();
};

/// Factorization damping design: D_d = M~ D_xi K~ + K~ D_xi M~ with the SPD
/// square roots M~ of M_x and K~ of K_d. Throws NotSPD.
Mat3 damping_matrix(const Mat3& mass, const Vec3& stiffness,
                    const Vec3& damping_ratio);

/// SPD matrix square root via symmetric eigendecomposition. Throws NotSPD.
Mat3 spd_sqrt(const Mat3& m);

/// Impedance control force
///   F_m = c^ + g^ + M^ xddot_d + F^_fr + K_d e + D_d edot,  e = x_d - x
/// with the orientation error wrapped to (-pi, pi]. `stiffness` selects the
/// currently commanded K_d diagonal (runtime switching is stateless).
Wrench control_force(const RobotModel& model, const ImpedanceConfig& cfg,
                     const Vec3& stiffness, const DynamicsTerms& terms,
                     const JointConfig& q, const PlatformPose& x,
                     const Vec3& xdot, const DesiredState& desired);

/// Convenience overload computing the dynamics terms internally.
Wrench control_force(const RobotModel& model, const ImpedanceConfig& cfg,
                     const Vec3& stiffness, const JointConfig& q,
                     const PlatformPose& x, const Vec3& xdot,
                     const DesiredState& desired);

/// Pose error e = x_d - x with wrapped orientation difference.
Vec3 pose_error(const PlatformPose& desired, const PlatformPose& actual);

}  // namespace prsim
