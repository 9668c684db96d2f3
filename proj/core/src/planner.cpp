#include "prsim/planner.hpp"

namespace prsim {

Vec2 retraction_target(const Vec2& x_t, const LineOfAction& loa,
                       double d_react) {
  if (!loa.valid)
    throw InvalidLoA("retraction target requires a valid line of action");
  return x_t + d_react * loa.dir;
}

double opening_target(const RobotGeometry& geom, const JointConfig& q,
                      const PlatformPose& x, int chain, double gamma_abs) {
  const int sign = clamping_angle_gradient_sign(geom, q, x, chain);
  if (sign == 0)
    throw DegenerateGradient("clamping-angle gradient is in the dead zone");
  return x.r - static_cast<double>(sign) * gamma_abs;
}

ReactionPlan ReactivePlanner::zero_g(const PlatformPose& x) {
  ReactionPlan plan;
  plan.mode = ReactionMode::ZeroG;
  plan.replanned = mode_ != ReactionMode::ZeroG;
  plan.target = x;  // hold: x_d = x, xdot_d = 0, xddot_d = 0
  mode_ = ReactionMode::ZeroG;
  return plan;
}

ReactionPlan ReactivePlanner::step(const Wrench& f_ext_hat,
                                   const JointConfig& q, const PlatformPose& x,
                                   const Vec3& xdot,
                                   const DesiredState& desired) {
  if (cfg_.strategy == ReactionStrategy::NoReaction) {
    ReactionPlan plan;
    plan.mode = ReactionMode::None;
    return plan;
  }
  if (cfg_.thresholds.zero_g_exceeded(f_ext_hat)) return zero_g(x);
  if (mode_ == ReactionMode::ZeroG) {
    // Zero-g is terminal for the run; keep holding.
    ReactionPlan plan;
    plan.mode = ReactionMode::ZeroG;
    plan.target = x;
    return plan;
  }

  if (!cfg_.thresholds.reaction_exceeded(f_ext_hat) ||
      cfg_.strategy == ReactionStrategy::ZeroGOnly) {
    ReactionPlan plan;
    plan.mode = mode_;
    return plan;
  }

  if (mode_ != ReactionMode::None) {
    // Hysteresis: already reacting; do not replan below eps_g.
    ReactionPlan plan;
    plan.mode = mode_;
    return plan;
  }

  try {
    return plan_reaction(f_ext_hat, q, x, xdot, desired);
  } catch (const InvalidLoA&) {
    return zero_g(x);
  } catch (const SingularJacobian&) {
    return zero_g(x);
  }
}

ReactionPlan ReactivePlanner::plan_reaction(const Wrench& f_ext_hat,
                                            const JointConfig& q,
                                            const PlatformPose& x,
                                            const Vec3& xdot,
                                            const DesiredState& desired) {
  const LineOfAction loa = line_of_action(f_ext_hat, cfg_.f_min);
  if (!loa.valid)
    throw InvalidLoA("force magnitude below f_min at reaction trigger");

  ReactionPlan plan;
  plan.min_dist = min_distances(*geom_, q, loa);

  const bool want_retraction =
      cfg_.strategy == ReactionStrategy::Retraction ||
      cfg_.strategy == ReactionStrategy::RetractionPlusOpening ||
      cfg_.strategy == ReactionStrategy::Full;
  bool want_opening = cfg_.strategy == ReactionStrategy::Opening ||
                      cfg_.strategy == ReactionStrategy::RetractionPlusOpening;
  if (cfg_.strategy == ReactionStrategy::Full) {
    // Without a trained FNN-1 every detection is treated as a collision.
    want_opening =
        fnn_contact_ != nullptr &&
        classify_contact(*fnn_contact_, f_ext_hat) == ContactClass::Clamping;
  }

  // Retraction strategies move away along the line of action; a pure
  // structure opening abandons the translational task at the contact pose
  // so the press does not continue while rotating.
  Vec2 target_t = want_retraction
                      ? retraction_target(x.t, loa, cfg_.d_react)
                      : x.t;
  double target_r = desired.pose.r;  // keep the preplanned orientation
  if (want_opening) {
    int chain;
    if (fnn_chain_ != nullptr) {
      chain = classify_chain(*fnn_chain_, f_ext_hat, plan.min_dist);
    } else {
      Eigen::Index arg;
      plan.min_dist.minCoeff(&arg);
      chain = static_cast<int>(arg);
    }
    plan.clamped_chain = chain;
    try {
      target_r = opening_target(*geom_, q, x, chain, cfg_.gamma_abs);
    } catch (const DegenerateGradient&) {
      // No steepest-increase direction; fall back to pure retraction.
      want_opening = false;
    }
  }

  plan.mode = want_opening
                  ? (want_retraction ? ReactionMode::RetractionPlusOpening
                                     : ReactionMode::StructureOpening)
                  : ReactionMode::Retraction;
  plan.target = PlatformPose(target_t, target_r);

  DesiredState start = desired;
  if (cfg_.start_from_actual) {
    start.pose = x;
    start.vel = xdot;
    start.acc = Vec3::Zero();
  }
  plan.trajectory = JerkLimitedTrajectory::plan(start, plan.target, cfg_.limits);
  plan.replanned = true;
  mode_ = plan.mode;
  return plan;
}

}  // namespace prsim
