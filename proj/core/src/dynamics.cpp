#include "prsim/dynamics.hpp"

#include <cmath>

namespace prsim {

namespace {

constexpr int kNumBodies = 1 + 2 * kNumChains;  // platform + two links per chain
constexpr double kMassMatrixFdStep = 1e-5;

struct BodyParams {
  double mass;
  double inertia;
};

/// Velocity Jacobians (xdot -> [v_com; omega]) of all bodies, platform first.
void body_jacobians(const RobotModel& model, const JointConfig& q,
                    const Mat9x3& j_qx,
                    std::array<Mat3, kNumBodies>& jac,
                    std::array<BodyParams, kNumBodies>& par) {
  const auto& geom = model.geom;
  const auto& dyn = model.dyn;

  // Platform COM at the platform origin: twist equals xdot.
  jac[0] = Mat3::Identity();
  par[0] = {dyn.platform_mass, dyn.platform_inertia};

  for (int i = 0; i < kNumChains; ++i) {
    const Eigen::RowVector3d row_a = j_qx.row(3 * i);
    const Eigen::RowVector3d row_p = j_qx.row(3 * i + 1);
    const Vec2 d1 = geom.link1_len[i] * unit_vec_deriv(q.a[i]);
    const Vec2 d2 = geom.link2_len[i] * unit_vec_deriv(q.a[i] + q.p[i]);

    Mat3& j1 = jac[1 + 2 * i];
    j1.topRows<2>() = (dyn.link1_com[i] * d1) * row_a;
    j1.bottomRows<1>() = row_a;
    par[1 + 2 * i] = {dyn.link1_mass[i], dyn.link1_inertia[i]};

    Mat3& j2 = jac[2 + 2 * i];
    j2.topRows<2>() = d1 * row_a + (dyn.link2_com[i] * d2) * (row_a + row_p);
    j2.bottomRows<1>() = row_a + row_p;
    par[2 + 2 * i] = {dyn.link2_mass[i], dyn.link2_inertia[i]};
  }
}

Mat3 mass_matrix_from_jacobians(const std::array<Mat3, kNumBodies>& jac,
                                const std::array<BodyParams, kNumBodies>& par) {
  Mat3 m = Mat3::Zero();
  for (int b = 0; b < kNumBodies; ++b) {
    const auto jv = jac[b].topRows<2>();
    const auto jw = jac[b].bottomRows<1>();
    m += par[b].mass * (jv.transpose() * jv) +
         par[b].inertia * (jw.transpose() * jw);
  }
  // Symmetrize against accumulation round-off.
  return 0.5 * (m + m.transpose());
}

}  // namespace

DynamicsParams DynamicsParams::defaults(const RobotGeometry& geom) {
  DynamicsParams p;
  for (int i = 0; i < kNumChains; ++i) {
    const double l1 = geom.link1_len[i], l2 = geom.link2_len[i];
    p.link1_mass[i] = 0.5;
    p.link2_mass[i] = 0.5;
    p.link1_inertia[i] = 0.5 * l1 * l1 / 12.0;  // slender rod about COM
    p.link2_inertia[i] = 0.5 * l2 * l2 / 12.0;
    p.link1_com[i] = 0.5;
    p.link2_com[i] = 0.5;
    p.drive_viscous[i] = 0.01;
    p.drive_coulomb[i] = 0.05;
  }
  p.platform_mass = 1.0;
  p.platform_inertia = 0.5 * 1.0 * 0.1 * 0.1;  // 0.1 m disc
  p.gravity = Vec2::Zero();
  return p;
}

Mat3 mass_matrix(const RobotModel& model, const JointConfig& q,
                 const PlatformPose& x) {
  const Mat9x3 j_qx = jacobian_q_x(model.geom, q, x);
  std::array<Mat3, kNumBodies> jac;
  std::array<BodyParams, kNumBodies> par;
  body_jacobians(model, q, j_qx, jac, par);
  return mass_matrix_from_jacobians(jac, par);
}

Vec3 drive_friction(const DynamicsParams& dyn, const Vec3& qa_dot) {
  Vec3 tau;
  for (int i = 0; i < kNumChains; ++i)
    tau[i] = dyn.drive_viscous[i] * qa_dot[i] +
             dyn.drive_coulomb[i] * std::tanh(qa_dot[i] / kCoulombSmoothing);
  return tau;
}

DynamicsTerms compute_terms(const RobotModel& model, const JointConfig& q,
                            const PlatformPose& x, const Vec3& xdot) {
  DynamicsTerms t;
  const Mat9x3 j_qx = jacobian_q_x(model.geom, q, x);
  std::array<Mat3, kNumBodies> jac;
  std::array<BodyParams, kNumBodies> par;
  body_jacobians(model, q, j_qx, jac, par);
  t.M = mass_matrix_from_jacobians(jac, par);

  // dM/dx_k by central differences with branch-consistent joints, then
  // Christoffel symbols so that Mdot = C + C^T holds.
  const auto branch = q.branch();
  std::array<Mat3, 3> dm;
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = x.vec(), xm = x.vec();
    xp[k] += kMassMatrixFdStep;
    xm[k] -= kMassMatrixFdStep;
    const PlatformPose pose_p{xp.head<2>(), xp.z()};
    const PlatformPose pose_m{xm.head<2>(), xm.z()};
    const Mat3 m_p =
        mass_matrix(model, inverse_kinematics(model.geom, pose_p, branch), pose_p);
    const Mat3 m_m =
        mass_matrix(model, inverse_kinematics(model.geom, pose_m, branch), pose_m);
    dm[k] = (m_p - m_m) / (2.0 * kMassMatrixFdStep);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double cij = 0.0;
      for (int k = 0; k < 3; ++k)
        cij += 0.5 * (dm[k](i, j) + dm[j](i, k) - dm[i](j, k)) * xdot[k];
      t.C(i, j) = cij;
    }

  // Gravity: g_x = -sum_b J_v,b^T m_b g (moved to the left-hand side).
  if (!model.dyn.gravity.isZero()) {
    Vec3 g = Vec3::Zero();
    for (int b = 0; b < kNumBodies; ++b)
      g -= par[b].mass * (jac[b].topRows<2>().transpose() * model.dyn.gravity);
    t.g = g;
  }

  // Drive friction projected through the active-joint rows of J_qx.
  Eigen::Matrix3d j_qax;
  for (int i = 0; i < kNumChains; ++i) j_qax.row(i) = j_qx.row(3 * i);
  const Vec3 qa_dot = j_qax * xdot;
  t.friction = j_qax.transpose() * drive_friction(model.dyn, qa_dot);
  return t;
}

Vec3 forward_dynamics(const DynamicsTerms& terms, const Vec3& xdot,
                      const Wrench& f_motor, const Wrench& f_ext) {
  const Vec3 rhs =
      f_motor + f_ext - terms.C * xdot - terms.g - terms.friction;
  return terms.M.ldlt().solve(rhs);
}

Vec3 forward_dynamics(const RobotModel& model, const JointConfig& q,
                      const PlatformPose& x, const Vec3& xdot,
                      const Wrench& f_motor, const Wrench& f_ext) {
  return forward_dynamics(compute_terms(model, q, x, xdot), xdot, f_motor,
                          f_ext);
}

LinkForceProjection project_link_force(const RobotGeometry& geom,
                                       const JointConfig& q,
                                       const PlatformPose& x,
                                       const ContactLocation& loc,
                                       const Vec2& f_link) {
  const ContactJacobians cj = contact_jacobians(geom, q, x, loc);
  LinkForceProjection out;
  out.platform = cj.xc_x.transpose() * f_link;
  out.tau_a = cj.xc_qa.transpose() * f_link;
  return out;
}

Vec3 actuation_map(const RobotGeometry& geom, const JointConfig& q,
                   const PlatformPose& x, const Wrench& f_motor) {
  return jacobian_x_qa(geom, q, x).transpose() * f_motor;
}

double kinetic_energy(const RobotModel& model, const JointConfig& q,
                      const PlatformPose& x, const Vec3& xdot) {
  return 0.5 * xdot.dot(mass_matrix(model, q, x) * xdot);
}

double potential_energy(const RobotModel& model, const JointConfig& q,
                        const PlatformPose& x) {
  if (model.dyn.gravity.isZero()) return 0.0;
  const auto& geom = model.geom;
  const auto& dyn = model.dyn;
  double e = -dyn.platform_mass * dyn.gravity.dot(x.t);
  for (int i = 0; i < kNumChains; ++i) {
    const Vec2 com1 = geom.base_anchor[i] +
                      dyn.link1_com[i] * geom.link1_len[i] * unit_vec(q.a[i]);
    const Vec2 com2 = geom.base_anchor[i] +
                      geom.link1_len[i] * unit_vec(q.a[i]) +
                      dyn.link2_com[i] * geom.link2_len[i] *
                          unit_vec(q.a[i] + q.p[i]);
    e -= dyn.link1_mass[i] * dyn.gravity.dot(com1);
    e -= dyn.link2_mass[i] * dyn.gravity.dot(com2);
  }
  return e;
}

namespace {

Vec3 acceleration_at(const RobotModel& model,
                     const std::array<int, kNumChains>& branch,
                     const PlatformPose& pose, const Vec3& vel,
                     const AppliedWrenchFn& applied) {
  const JointConfig q = inverse_kinematics(model.geom, pose, branch);
  const DynamicsTerms terms = compute_terms(model, q, pose, vel);
  return forward_dynamics(terms, vel, applied(q, pose, vel), Wrench::Zero());
}

}  // namespace

PlatformState integrate_step(const RobotModel& model,
                             const std::array<int, kNumChains>& branch,
                             const PlatformState& state, double dt,
                             const AppliedWrenchFn& applied,
                             Integrator integrator) {
  PlatformState next;
  const Vec3 x0 = state.pose.vec();
  const Vec3 v0 = state.vel;
  if (integrator == Integrator::SemiImplicitEuler) {
    const Vec3 a = acceleration_at(model, branch, state.pose, v0, applied);
    next.vel = v0 + dt * a;
    next.pose = PlatformPose(Vec3(x0 + dt * next.vel));
  } else {
    const auto f = [&](const Vec3& xv, const Vec3& vv) {
      return acceleration_at(model, branch, PlatformPose(xv), vv, applied);
    };
    const Vec3 a1 = f(x0, v0);
    const Vec3 x2 = x0 + 0.5 * dt * v0, v2 = v0 + 0.5 * dt * a1;
    const Vec3 a2 = f(x2, v2);
    const Vec3 x3 = x0 + 0.5 * dt * v2, v3 = v0 + 0.5 * dt * a2;
    const Vec3 a3 = f(x3, v3);
    const Vec3 x4 = x0 + dt * v3, v4 = v0 + dt * a3;
    const Vec3 a4 = f(x4, v4);
    next.pose = PlatformPose(
        Vec3(x0 + dt / 6.0 * (v0 + 2.0 * v2 + 2.0 * v3 + v4)));
    next.vel = v0 + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  }
  if (!next.pose.vec().allFinite() || !next.vel.allFinite())
    throw SimDiverged("plant state became non-finite");
  return next;
}

}  // namespace prsim
