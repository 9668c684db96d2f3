#include "prsim/contact_geometry.hpp"

namespace prsim {

LineOfAction line_of_action(const Wrench& f_ext_hat, double f_min) {
  LineOfAction loa;
  const Vec2 f = f_ext_hat.head<2>();
  const double fnorm = f.norm();
  if (fnorm < f_min) return loa;
  loa.valid = true;
  loa.dir = f / fnorm;
  loa.lever = f_ext_hat.z() * Vec2(f.y(), -f.x()) / (fnorm * fnorm);
  return loa;
}

std::pair<Vec3, Vec3> line_of_action_spatial(const Vec3& force,
                                             const Vec3& moment) {
  // m = r x f = S(f)^T r with S(f) the cross-product matrix of f.
  Mat3 skew_t;  // S^T(f) = -S(f)
  skew_t << 0, force.z(), -force.y(),
      -force.z(), 0, force.x(),
      force.y(), -force.x(), 0;
  const Vec3 lever =
      skew_t.completeOrthogonalDecomposition().pseudoInverse() * moment;
  return {lever, force.normalized()};
}

Vec3 min_distances(const RobotGeometry& geom, const JointConfig& q,
                   const LineOfAction& loa) {
  if (!loa.valid)
    throw InvalidLoA("min_distances requires a valid line of action");
  const PlatformPose pose = pose_from_joints(geom, q);
  const auto coupling = coupling_joint_positions(geom, q);
  Vec3 d;
  for (int i = 0; i < kNumChains; ++i) {
    const Vec2 lever_cj = coupling[i] - pose.t;  // platform-origin lever
    d[i] = std::abs(cross2(lever_cj - loa.lever, loa.dir));
  }
  return d;
}

int clamping_angle_gradient_sign(const RobotGeometry& geom,
                                 const JointConfig& q, const PlatformPose& x,
                                 int chain) {
  const Mat9x3 j_qx = jacobian_q_x(geom, q, x);
  const double entry = j_qx(3 * chain + 1, 2);  // dq_p,i / dx_r
  if (std::abs(entry) < 1e-9) return 0;
  return entry > 0.0 ? +1 : -1;
}

}  // namespace prsim
