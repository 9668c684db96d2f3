#include "prsim/sim.hpp"

namespace prsim {

namespace {

/// Clamp contact points on the two links of the clamped chain.
void clamp_points(const ClampSpec& clamp, const RobotGeometry& geom,
                  const JointConfig& q, Vec2& p1, Vec2& p2,
                  ContactLocation& loc1, ContactLocation& loc2) {
  loc1 = {clamp.chain, ContactLocation::Body::Link1, clamp.s1};
  loc2 = {clamp.chain, ContactLocation::Body::Link2, clamp.s2};
  p1 = contact_point(geom, q, loc1);
  p2 = contact_point(geom, q, loc2);
}

}  // namespace

ContactForces step_contact_model(const ResolvedContact& contact,
                                 const RobotGeometry& geom,
                                 const JointConfig& q, const PlatformPose& x,
                                 const Vec3& xdot) {
  ContactForces out;
  if (contact.type == ContactSpec::Type::None) return out;

  const Mat9x3 j_qx = jacobian_q_x(geom, q, x);

  if (contact.type == ContactSpec::Type::Collision) {
    const ObstacleSpec& obs = contact.obstacle;
    const Vec2 p = contact_point(geom, q, contact.location);
    const double gap = obs.normal.dot(p - obs.point);
    if (gap >= 0.0) return out;
    const Mat2x3 xc_x =
        contact_jacobian_q(geom, q, contact.location) * j_qx;
    const double gap_rate = obs.normal.dot(xc_x * xdot);
    const double normal_force =
        std::max(0.0, -obs.stiffness * gap - obs.damping * gap_rate);
    if (normal_force <= 0.0) return out;
    const Vec2 f = normal_force * obs.normal;
    out.points.push_back({contact.location, f});
    out.platform_wrench = xc_x.transpose() * f;
    out.magnitude = normal_force;
    return out;
  }

  // Clamping: object squeezed between a point on link 1 and one on link 2.
  const ClampSpec& clamp = contact.clamp;
  Vec2 p1, p2;
  ContactLocation loc1, loc2;
  clamp_points(clamp, geom, q, p1, p2, loc1, loc2);
  const Vec2 sep = p1 - p2;
  const double dist = sep.norm();
  if (dist >= clamp.object_size || dist < 1e-9) return out;
  const Vec2 axis = sep / dist;
  const Mat2x3 j1 = contact_jacobian_q(geom, q, loc1) * j_qx;
  const Mat2x3 j2 = contact_jacobian_q(geom, q, loc2) * j_qx;
  const double dist_rate = axis.dot((j1 - j2) * xdot);
  const double squeeze = clamp.object_size - dist;
  const double normal_force =
      std::max(0.0, clamp.stiffness * squeeze - clamp.damping * dist_rate);
  if (normal_force <= 0.0) return out;
  const Vec2 f1 = normal_force * axis;   // pushes the links apart
  out.points.push_back({loc1, f1});
  out.points.push_back({loc2, -f1});
  out.platform_wrench = j1.transpose() * f1 - j2.transpose() * f1;
  out.magnitude = normal_force;
  return out;
}

ResolvedContact resolve_contact(const Scenario& sc) {
  ResolvedContact rc;
  rc.type = sc.contact.type;
  if (rc.type == ContactSpec::Type::None) return rc;

  if (rc.type == ContactSpec::Type::Collision) {
    rc.location = sc.contact.location;
    if (sc.contact.obstacle) {
      rc.obstacle = *sc.contact.obstacle;
      rc.obstacle.stiffness = sc.contact.stiffness;
      rc.obstacle.damping = sc.contact.damping;
      return rc;
    }
    // Kinematic dry run of the task trajectory: place the obstacle surface
    // where the struck body point is at engage_time, facing its motion.
    const JerkLimitedTrajectory task = JerkLimitedTrajectory::plan(
        DesiredState{sc.initial_pose, Vec3::Zero(), Vec3::Zero()},
        sc.task.target, sc.task.limits);
    const double t = sc.contact.engage_time;
    const DesiredState at = task.sample(t);
    const JointConfig q = inverse_kinematics(sc.model.geom, at.pose, sc.branch);
    const Vec2 p = contact_point(sc.model.geom, q, rc.location);
    const Mat2x3 xc_x = contact_jacobian_q(sc.model.geom, q, rc.location) *
                        jacobian_q_x(sc.model.geom, q, at.pose);
    const Vec2 v = xc_x * at.vel;
    if (v.norm() < 1e-6)
      throw ConfigError(
          "auto obstacle placement: body point is not moving at engage_time");
    rc.obstacle.normal = -v.normalized();
    rc.obstacle.point = p - sc.contact.engage_offset * rc.obstacle.normal;
    rc.obstacle.stiffness = sc.contact.stiffness;
    rc.obstacle.damping = sc.contact.damping;
    return rc;
  }

  rc.clamp = sc.contact.clamp;
  if (rc.clamp.object_size <= 0.0) {
    // Size the object to the link-pair gap at engage_time on the dry run.
    const JerkLimitedTrajectory task = JerkLimitedTrajectory::plan(
        DesiredState{sc.initial_pose, Vec3::Zero(), Vec3::Zero()},
        sc.task.target, sc.task.limits);
    const DesiredState at = task.sample(sc.contact.engage_time);
    const JointConfig q = inverse_kinematics(sc.model.geom, at.pose, sc.branch);
    Vec2 p1, p2;
    ContactLocation l1, l2;
    clamp_points(rc.clamp, sc.model.geom, q, p1, p2, l1, l2);
    rc.clamp.object_size = (p1 - p2).norm();
  }
  return rc;
}

}  // namespace prsim
