#include "prsim/kinematics.hpp"

#include <cmath>

namespace prsim {

namespace {

constexpr double kSingularRcond = 1e-12;

/// World target of chain i's coupling point for a given pose.
Vec2 coupling_target(const RobotGeometry& geom, const PlatformPose& x, int i) {
  return x.t + rot2(x.r) * geom.platform_anchor[i];
}

/// Elbow position of chain i.
Vec2 elbow(const RobotGeometry& geom, double q_a, int i) {
  return geom.base_anchor[i] + geom.link1_len[i] * unit_vec(q_a);
}

}  // namespace

RobotGeometry RobotGeometry::symmetric() {
  RobotGeometry g;
  const double angles[kNumChains] = {M_PI / 2.0, M_PI / 2.0 + 2.0 * M_PI / 3.0,
                                     M_PI / 2.0 + 4.0 * M_PI / 3.0};
  for (int i = 0; i < kNumChains; ++i) {
    g.base_anchor[i] = 0.4 * unit_vec(angles[i]);
    g.platform_anchor[i] = 0.1 * unit_vec(angles[i]);
    g.link1_len[i] = 0.25;
    g.link2_len[i] = 0.25;
  }
  return g;
}

Vec9 constraints_residual(const RobotGeometry& geom, const JointConfig& q,
                          const PlatformPose& x) {
  Vec9 res;
  for (int i = 0; i < kNumChains; ++i) {
    const Vec2 loop = geom.base_anchor[i] + geom.link1_len[i] * unit_vec(q.a[i]) +
                      geom.link2_len[i] * unit_vec(q.a[i] + q.p[i]) -
                      coupling_target(geom, x, i);
    res[3 * i] = loop.x();
    res[3 * i + 1] = loop.y();
    res[3 * i + 2] = wrap_angle(q.a[i] + q.p[i] + q.c[i] - x.r);
  }
  return res;
}

Vec3 reduced_residual(const RobotGeometry& geom, const Vec3& q_a,
                      const PlatformPose& x) {
  Vec3 res;
  for (int i = 0; i < kNumChains; ++i) {
    const Vec2 w = coupling_target(geom, x, i) - elbow(geom, q_a[i], i);
    res[i] = w.squaredNorm() - geom.link2_len[i] * geom.link2_len[i];
  }
  return res;
}

Mat3 reduced_jacobian_x(const RobotGeometry& geom, const Vec3& q_a,
                        const PlatformPose& x) {
  Mat3 jac;
  const Mat2 rot = rot2(x.r);
  for (int i = 0; i < kNumChains; ++i) {
    const Vec2 target = x.t + rot * geom.platform_anchor[i];
    const Vec2 w = target - elbow(geom, q_a[i], i);
    jac(i, 0) = 2.0 * w.x();
    jac(i, 1) = 2.0 * w.y();
    jac(i, 2) = 2.0 * w.dot(perp(rot * geom.platform_anchor[i]));
  }
  return jac;
}

Mat3 reduced_jacobian_qa(const RobotGeometry& geom, const Vec3& q_a,
                         const PlatformPose& x) {
  Mat3 jac = Mat3::Zero();
  for (int i = 0; i < kNumChains; ++i) {
    const Vec2 w = coupling_target(geom, x, i) - elbow(geom, q_a[i], i);
    jac(i, i) = -2.0 * geom.link1_len[i] * unit_vec_deriv(q_a[i]).dot(w);
  }
  return jac;
}

JointConfig inverse_kinematics(const RobotGeometry& geom, const PlatformPose& x,
                               const std::array<int, kNumChains>& branch) {
  JointConfig q;
  for (int i = 0; i < kNumChains; ++i) {
    const double l1 = geom.link1_len[i], l2 = geom.link2_len[i];
    const Vec2 v = coupling_target(geom, x, i) - geom.base_anchor[i];
    const double d2 = v.squaredNorm();
    const double c = (d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if (c > 1.0 + 1e-12 || c < -1.0 - 1e-12)
      throw Unreachable(i, "coupling point outside chain annulus");
    const double cc = std::clamp(c, -1.0, 1.0);
    const double qp = (branch[i] >= 0 ? 1.0 : -1.0) * std::acos(cc);
    const double qa = std::atan2(v.y(), v.x()) -
                      std::atan2(l2 * std::sin(qp), l1 + l2 * std::cos(qp));
    q.a[i] = wrap_angle(qa);
    q.p[i] = qp;
    q.c[i] = wrap_angle(x.r - q.a[i] - q.p[i]);
  }
  return q;
}

namespace detail {

Mat3 solve_checked(const Mat3& a, const Mat3& rhs, const char* what) {
  Eigen::JacobiSVD<Mat3> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) < kSingularRcond * svd.singularValues()(0))
    throw SingularJacobian(what);
  return svd.solve(rhs);
}

Vec3 solve_checked(const Mat3& a, const Vec3& rhs, const char* what) {
  Eigen::JacobiSVD<Mat3> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) < kSingularRcond * svd.singularValues()(0))
    throw SingularJacobian(what);
  return svd.solve(rhs);
}

}  // namespace detail

namespace {

/// The FK problem is ill-posed at a parallel singularity even when the guess
/// already satisfies the constraints; flag rank deficiency at the solution.
FkResult checked_fk_result(const RobotGeometry& geom, const Vec3& q_a,
                           const PlatformPose& pose, int iterations) {
  const Mat3 jac = reduced_jacobian_x(geom, q_a, pose);
  Eigen::JacobiSVD<Mat3> svd(jac);
  if (svd.singularValues()(2) < kSingularRcond * svd.singularValues()(0))
    throw SingularJacobian(
        "reduced constraint Jacobian rank-deficient at the FK solution");
  return {pose, iterations};
}

}  // namespace

FkResult forward_kinematics(const RobotGeometry& geom, const Vec3& q_a,
                            const PlatformPose& x_guess, int max_iters) {
  constexpr double kTol = 1e-10;
  Vec3 xv = x_guess.vec();
  Vec3 res = reduced_residual(geom, q_a, PlatformPose(xv));
  double res_norm = res.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < max_iters; ++it) {
    if (res_norm < kTol) return checked_fk_result(geom, q_a, PlatformPose(xv), it);
    const Mat3 jac = reduced_jacobian_x(geom, q_a, PlatformPose(xv));
    const Vec3 full_step = detail::solve_checked(
        jac, Vec3(-res), "reduced constraint Jacobian rank-deficient in FK");
    // Damped update: halve the step while the residual grows.
    double alpha = 1.0;
    for (int backtrack = 0; backtrack < 8; ++backtrack) {
      const Vec3 trial = xv + alpha * full_step;
      const Vec3 trial_res = reduced_residual(geom, q_a, PlatformPose(trial));
      const double trial_norm = trial_res.lpNorm<Eigen::Infinity>();
      if (trial_norm < res_norm || backtrack == 7) {
        xv = trial;
        res = trial_res;
        res_norm = trial_norm;
        break;
      }
      alpha *= 0.5;
    }
  }
  if (res_norm < kTol)
    return checked_fk_result(geom, q_a, PlatformPose(xv), max_iters);
  throw NoConvergence("forward kinematics did not converge");
}

JointConfig joints_from_pose(const RobotGeometry& geom, const Vec3& q_a,
                             const PlatformPose& x) {
  JointConfig q;
  for (int i = 0; i < kNumChains; ++i) {
    const Vec2 w = coupling_target(geom, x, i) - elbow(geom, q_a[i], i);
    q.a[i] = wrap_angle(q_a[i]);
    q.p[i] = wrap_angle(std::atan2(w.y(), w.x()) - q_a[i]);
    q.c[i] = wrap_angle(x.r - q.a[i] - q.p[i]);
  }
  return q;
}

namespace detail {

Mat9 constraints_jacobian_q(const RobotGeometry& geom, const JointConfig& q) {
  Mat9 jac = Mat9::Zero();
  for (int i = 0; i < kNumChains; ++i) {
    const double l1 = geom.link1_len[i], l2 = geom.link2_len[i];
    const Vec2 d1 = l1 * unit_vec_deriv(q.a[i]);
    const Vec2 d2 = l2 * unit_vec_deriv(q.a[i] + q.p[i]);
    const int r = 3 * i;
    jac.block<2, 1>(r, r) = d1 + d2;
    jac.block<2, 1>(r, r + 1) = d2;
    jac(r + 2, r) = 1.0;
    jac(r + 2, r + 1) = 1.0;
    jac(r + 2, r + 2) = 1.0;
  }
  return jac;
}

Mat9x3 constraints_jacobian_x(const RobotGeometry& geom, const PlatformPose& x) {
  Mat9x3 jac = Mat9x3::Zero();
  const Mat2 rot = rot2(x.r);
  for (int i = 0; i < kNumChains; ++i) {
    const int r = 3 * i;
    jac.block<2, 2>(r, 0) = -Mat2::Identity();
    jac.block<2, 1>(r, 2) = -perp(rot * geom.platform_anchor[i]);
    jac(r + 2, 2) = -1.0;
  }
  return jac;
}

}  // namespace detail

Mat9x3 jacobian_q_x(const RobotGeometry& geom, const JointConfig& q,
                    const PlatformPose& x) {
  // R_dq is block diagonal per chain: a 2x2 loop block over (q_a, q_p) plus
  // the angle-sum row, so the 9x9 solve reduces to 2x2 inverses.
  Mat9x3 jac;
  const Mat2 rot = rot2(x.r);
  for (int i = 0; i < kNumChains; ++i) {
    const Vec2 d1 = geom.link1_len[i] * unit_vec_deriv(q.a[i]);
    const Vec2 d2 = geom.link2_len[i] * unit_vec_deriv(q.a[i] + q.p[i]);
    Mat2 loop_block;
    loop_block.col(0) = d1 + d2;
    loop_block.col(1) = d2;
    const double det = loop_block.determinant();
    const double scale = loop_block.col(0).norm() * loop_block.col(1).norm();
    if (std::abs(det) < kSingularRcond * scale)
      throw SingularJacobian("constraint Jacobian R_dq rank-deficient");
    Mat2 inv;
    inv << loop_block(1, 1), -loop_block(0, 1), -loop_block(1, 0),
        loop_block(0, 0);
    inv /= det;
    Mat2x3 target_jac;  // d(coupling target)/dx
    target_jac.leftCols<2>() = Mat2::Identity();
    target_jac.col(2) = perp(rot * geom.platform_anchor[i]);
    const Mat2x3 rows = inv * target_jac;
    jac.row(3 * i) = rows.row(0);
    jac.row(3 * i + 1) = rows.row(1);
    jac.row(3 * i + 2) =
        Eigen::RowVector3d(0, 0, 1) - rows.row(0) - rows.row(1);
  }
  return jac;
}

Mat3 jacobian_x_qa(const RobotGeometry& geom, const JointConfig& q,
                   const PlatformPose& x) {
  const Mat3 r_dx = reduced_jacobian_x(geom, q.actives(), x);
  return detail::solve_checked(
      r_dx, Mat3(-reduced_jacobian_qa(geom, q.actives(), x)),
      "reduced constraint Jacobian rank-deficient");
}

Vec2 contact_point(const RobotGeometry& geom, const JointConfig& q,
                   const ContactLocation& loc) {
  const int i = loc.chain;
  switch (loc.body) {
    case ContactLocation::Body::Link1:
      return geom.base_anchor[i] + loc.s * geom.link1_len[i] * unit_vec(q.a[i]);
    case ContactLocation::Body::Link2:
      return elbow(geom, q.a[i], i) +
             loc.s * geom.link2_len[i] * unit_vec(q.a[i] + q.p[i]);
    case ContactLocation::Body::Platform: {
      // Platform point expressed through chain i's serial kinematics so that
      // x_C = f_i(q_i): coupling point minus (1-s) of the rotated anchor.
      const double sum = q.a[i] + q.p[i] + q.c[i];
      return elbow(geom, q.a[i], i) +
             geom.link2_len[i] * unit_vec(q.a[i] + q.p[i]) -
             (1.0 - loc.s) * rot2(sum) * geom.platform_anchor[i];
    }
  }
  throw ConfigError("invalid contact location body");
}

Mat2x9 contact_jacobian_q(const RobotGeometry& geom, const JointConfig& q,
                          const ContactLocation& loc) {
  Mat2x9 jac = Mat2x9::Zero();
  const int i = loc.chain;
  const int col = 3 * i;
  const double l1 = geom.link1_len[i], l2 = geom.link2_len[i];
  const Vec2 d1 = l1 * unit_vec_deriv(q.a[i]);
  const Vec2 d2 = l2 * unit_vec_deriv(q.a[i] + q.p[i]);
  switch (loc.body) {
    case ContactLocation::Body::Link1:
      jac.block<2, 1>(0, col) = loc.s * d1;
      break;
    case ContactLocation::Body::Link2:
      jac.block<2, 1>(0, col) = d1 + loc.s * d2;
      jac.block<2, 1>(0, col + 1) = loc.s * d2;
      break;
    case ContactLocation::Body::Platform: {
      const double sum = q.a[i] + q.p[i] + q.c[i];
      const Vec2 danchor =
          -(1.0 - loc.s) * perp(rot2(sum) * geom.platform_anchor[i]);
      jac.block<2, 1>(0, col) = d1 + d2 + danchor;
      jac.block<2, 1>(0, col + 1) = d2 + danchor;
      jac.block<2, 1>(0, col + 2) = danchor;
      break;
    }
  }
  return jac;
}

ContactJacobians contact_jacobians(const RobotGeometry& geom,
                                   const JointConfig& q, const PlatformPose& x,
                                   const ContactLocation& loc) {
  ContactJacobians out;
  out.xc_q = contact_jacobian_q(geom, q, loc);
  out.xc_x = out.xc_q * jacobian_q_x(geom, q, x);
  out.xc_qa = out.xc_x * jacobian_x_qa(geom, q, x);
  return out;
}

std::array<Vec2, kNumChains> coupling_joint_positions(const RobotGeometry& geom,
                                                      const JointConfig& q) {
  std::array<Vec2, kNumChains> pts;
  for (int i = 0; i < kNumChains; ++i)
    pts[i] = elbow(geom, q.a[i], i) +
             geom.link2_len[i] * unit_vec(q.a[i] + q.p[i]);
  return pts;
}

PlatformPose pose_from_joints(const RobotGeometry& geom, const JointConfig& q) {
  const double x_r = wrap_angle(q.a[0] + q.p[0] + q.c[0]);
  const auto coupling = coupling_joint_positions(geom, q);
  const Vec2 x_t = coupling[0] - rot2(x_r) * geom.platform_anchor[0];
  return {x_t, x_r};
}

}  // namespace prsim
