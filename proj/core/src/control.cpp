#include "prsim/control.hpp"

namespace prsim {

Mat3 spd_sqrt(const Mat3& m) {
  const Mat3 sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(sym);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
    throw NotSPD("matrix is not symmetric positive definite");
  return eig.operatorSqrt();
}

Mat3 damping_matrix(const Mat3& mass, const Vec3& stiffness,
                    const Vec3& damping_ratio) {
  if ((stiffness.array() <= 0.0).any())
    throw NotSPD("stiffness diagonal must be positive");
  const Mat3 m_sqrt = spd_sqrt(mass);
  const Mat3 k_sqrt = stiffness.cwiseSqrt().asDiagonal();
  const Mat3 d_xi = damping_ratio.asDiagonal();
  return m_sqrt * d_xi * k_sqrt + k_sqrt * d_xi * m_sqrt;
}

Vec3 pose_error(const PlatformPose& desired, const PlatformPose& actual) {
  Vec3 e;
  e.head<2>() = desired.t - actual.t;
  e.z() = wrap_angle(desired.r - actual.r);
  return e;
}

Wrench control_force(const RobotModel& model, const ImpedanceConfig& cfg,
                     const Vec3& stiffness, const DynamicsTerms& terms,
                     const JointConfig& q, const PlatformPose& x,
                     const Vec3& xdot, const DesiredState& desired) {
  const Vec3 e = pose_error(desired.pose, x);
  const Vec3 edot = desired.vel - xdot;
  const Mat3 d_d = damping_matrix(terms.M, stiffness, cfg.damping_ratio);

  // Friction compensation from measured drive rates; below the chatter
  // threshold the desired rates are used instead.
  Mat3 j_qax;
  const Mat9x3 j_qx = jacobian_q_x(model.geom, q, x);
  for (int i = 0; i < kNumChains; ++i) j_qax.row(i) = j_qx.row(3 * i);
  Vec3 qa_dot = j_qax * xdot;
  if (qa_dot.lpNorm<Eigen::Infinity>() < 1e-3) qa_dot = j_qax * desired.vel;
  const Vec3 fric_comp = j_qax.transpose() * drive_friction(model.dyn, qa_dot);

  Wrench f = terms.C * xdot + terms.g + terms.M * desired.acc + fric_comp +
             stiffness.asDiagonal() * e + d_d * edot;

  if (cfg.torque_limit) {
    const Mat3 j_xqa = jacobian_x_qa(model.geom, q, x);
    Vec3 tau = j_xqa.transpose() * f;
    const double lim = *cfg.torque_limit;
    const Vec3 clipped = tau.cwiseMax(-lim).cwiseMin(lim);
    if ((clipped - tau).lpNorm<Eigen::Infinity>() > 0.0)
      f = detail::solve_checked(Mat3(j_xqa.transpose()), clipped,
                                "actuation map singular at torque limit");
  }
  return f;
}

Wrench control_force(const RobotModel& model, const ImpedanceConfig& cfg,
                     const Vec3& stiffness, const JointConfig& q,
                     const PlatformPose& x, const Vec3& xdot,
                     const DesiredState& desired) {
  return control_force(model, cfg, stiffness, compute_terms(model, q, x, xdot),
                       q, x, xdot, desired);
}

}  // namespace prsim
